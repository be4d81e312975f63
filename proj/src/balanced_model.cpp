// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgh/balanced_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "bgh/error.hpp"

namespace bgh {

namespace {

using u128 = unsigned __int128;

void check_depth(int q) {
  if (q < 1 || q > kMaxBalanceDepth) {
    throw ArgumentError("balance depth q=" + std::to_string(q) + " outside [1, 24]");
  }
}

// floor(N/(N+2) * v) for v <= 2^63.
std::uint64_t shrink(std::uint64_t v, std::uint64_t n) {
  return static_cast<std::uint64_t>(static_cast<u128>(v) * n / (static_cast<u128>(n) + 2));
}

}  // namespace

std::uint64_t standard_value(const GeoPoint& p) {
  return encode(p, kMaxBits).code << (kFixedBits - kMaxBits);
}

double HashInterval::lo_value() const { return std::ldexp(static_cast<double>(lo), -kFixedBits); }
double HashInterval::hi_value() const { return std::ldexp(static_cast<double>(hi), -kFixedBits); }
double HashInterval::width() const {
  return empty() ? 0.0 : std::ldexp(static_cast<double>(hi - lo), -kFixedBits);
}

BalancedModel BalancedModel::from_breakpoints(int q, std::vector<std::uint64_t> breakpoints,
                                              std::uint64_t n_points,
                                              std::uint64_t total_weight) {
  check_depth(q);
  const std::size_t expected = (std::size_t{1} << q) + 1;
  if (breakpoints.size() != expected) {
    throw ArgumentError("expected " + std::to_string(expected) + " breakpoints, got " +
                        std::to_string(breakpoints.size()));
  }
  if (n_points == 0) throw ArgumentError("point count must be positive");
  if (total_weight == 0) throw ArgumentError("total weight must be positive");
  if (breakpoints.front() != 0) throw ArgumentError("first breakpoint must be 0");
  if (breakpoints.back() != kFixedOne) throw ArgumentError("last breakpoint must be 1");
  const std::uint64_t ceiling = shrink(kFixedOne, n_points) + 1;
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (breakpoints[i] < breakpoints[i - 1]) {
      throw ArgumentError("breakpoints not monotone at index " + std::to_string(i));
    }
    if (i + 1 < breakpoints.size() && breakpoints[i] > ceiling) {
      throw ArgumentError("breakpoint " + std::to_string(i) + " exceeds N/(N+2)");
    }
  }
  BalancedModel m;
  m.q_ = q;
  m.breakpoints_ = std::move(breakpoints);
  m.n_points_ = n_points;
  m.total_weight_ = total_weight;
  return m;
}

BalancedModel BalancedModel::identity(int q) {
  check_depth(q);
  const std::size_t count = std::size_t{1} << q;
  std::vector<std::uint64_t> s(count + 1);
  for (std::size_t i = 0; i <= count; ++i) s[i] = static_cast<std::uint64_t>(i) << (kFixedBits - q);
  const std::uint64_t n = (std::uint64_t{1} << (q + 1)) - 2;
  return from_breakpoints(q, std::move(s), n, n);
}

std::uint64_t BalancedModel::forward(std::uint64_t standard) const {
  if (standard >= kFixedOne) throw DomainError("standard hash value must be below 1");
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), standard);
  const auto i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  const std::uint64_t lo = breakpoints_[i];
  const std::uint64_t width = breakpoints_[i + 1] - lo;
  const int shift = kFixedBits - q_;
  const auto frac = static_cast<std::uint64_t>((static_cast<u128>(standard - lo) << shift) / width);
  return (static_cast<std::uint64_t>(i) << shift) + frac;
}

std::uint64_t BalancedModel::lower_preimage(std::uint64_t balanced) const {
  if (balanced >= kFixedOne) return kFixedOne;
  const int shift = kFixedBits - q_;
  const std::size_t i = balanced >> shift;
  const std::uint64_t rem = balanced & ((std::uint64_t{1} << shift) - 1);
  const std::uint64_t width = breakpoints_[i + 1] - breakpoints_[i];
  const u128 scaled = static_cast<u128>(rem) * width;
  const u128 step = (scaled + ((static_cast<u128>(1) << shift) - 1)) >> shift;
  return breakpoints_[i] + static_cast<std::uint64_t>(step);
}

HashInterval BalancedModel::bucket(std::size_t i) const {
  if (i >= bucket_count()) throw ArgumentError("bucket index out of range");
  return {breakpoints_[i], breakpoints_[i + 1]};
}

BalancedModel fit(std::span<const WeightedPoint> points, int q) {
  check_depth(q);
  std::vector<WeightedHash> hashes;
  hashes.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].weight == 0) continue;
    try {
      hashes.push_back({standard_value(points[j].point), points[j].weight});
    } catch (const DomainError& e) {
      throw DomainError("point " + std::to_string(j) + ": " + e.what());
    }
  }
  return fit_hashes(std::move(hashes), q);
}

BalancedModel fit_hashes(std::vector<WeightedHash> hashes, int q) {
  check_depth(q);
  std::erase_if(hashes, [](const WeightedHash& h) { return h.weight == 0; });
  if (hashes.empty()) throw FitError("no points with positive weight");
  std::sort(hashes.begin(), hashes.end(),
            [](const WeightedHash& a, const WeightedHash& b) { return a.value < b.value; });

  // Collapse duplicates: distinct values with cumulative weights.
  std::vector<std::uint64_t> values;
  std::vector<u128> cumulative;
  u128 running = 0;
  for (const auto& h : hashes) {
    if (h.value >= kFixedOne) throw DomainError("standard hash value must be below 1");
    running += h.weight;
    if (!values.empty() && values.back() == h.value) {
      cumulative.back() = running;
    } else {
      values.push_back(h.value);
      cumulative.push_back(running);
    }
  }
  if (running > UINT64_MAX) throw FitError("total weight overflows 64 bits");
  const auto total = static_cast<std::uint64_t>(running);
  const std::uint64_t n = values.size();

  const std::size_t count = std::size_t{1} << q;
  std::vector<std::uint64_t> s(count + 1);
  s[0] = 0;
  s[count] = kFixedOne;
  for (std::size_t i = 1; i < count; ++i) {
    // rank = ceil(i * W / 2^q), 1-based, counting multiplicity
    const u128 rank = ((static_cast<u128>(i) * total) + (count - 1)) >> q;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), rank);
    s[i] = shrink(values[static_cast<std::size_t>(it - cumulative.begin())], n);
  }
  return BalancedModel::from_breakpoints(q, std::move(s), n, total);
}

HashCode balanced_encode_value(const BalancedModel& model, std::uint64_t standard, int bits) {
  if (bits < 1 || bits > kMaxBits) {
    throw ArgumentError("bit count " + std::to_string(bits) + " outside [1, 60]");
  }
  return {model.forward(standard) >> (kFixedBits - bits), bits};
}

HashCode balanced_encode(const BalancedModel& model, const GeoPoint& p, int bits) {
  return balanced_encode_value(model, standard_value(p), bits);
}

HashInterval balanced_decode(const BalancedModel& model, const HashCode& h) {
  if (h.bits < 1 || h.bits > kMaxBits || (h.bits < 64 && (h.code >> h.bits) != 0)) {
    throw ArgumentError("invalid hash code");
  }
  const int shift = kFixedBits - h.bits;
  return {model.lower_preimage(h.code << shift), model.lower_preimage((h.code + 1) << shift)};
}

HashInterval DyadicCell::interval() const {
  const int shift = kFixedBits - depth;
  return {prefix << shift, (prefix + 1) << shift};
}

std::vector<DyadicCell> dyadic_cover(const HashInterval& interval, int depth_cap) {
  if (depth_cap < 0 || depth_cap > kMaxBits) {
    throw ArgumentError("depth cap " + std::to_string(depth_cap) + " outside [0, 60]");
  }
  if (interval.hi > kFixedOne) throw ArgumentError("interval exceeds 1");
  std::vector<DyadicCell> cells;
  if (interval.empty()) return cells;
  const std::uint64_t grain = std::uint64_t{1} << (kFixedBits - depth_cap);
  std::uint64_t lo = interval.lo & ~(grain - 1);
  const std::uint64_t hi = std::min<std::uint64_t>(kFixedOne, (interval.hi + grain - 1) & ~(grain - 1));
  while (lo < hi) {
    std::uint64_t size = lo == 0 ? kFixedOne : (lo & (~lo + 1));
    while (size > hi - lo) size >>= 1;
    const int depth = kFixedBits - std::countr_zero(size);
    const std::uint64_t prefix = lo >> (kFixedBits - depth);
    cells.push_back({prefix, depth, cell_rect(prefix, depth)});
    lo += size;
  }
  return cells;
}

std::vector<BucketRegion> bucket_regions(const BalancedModel& model, int k, int depth_cap) {
  if (k < 1 || k > kMaxBalanceDepth) {
    throw ArgumentError("prefix bits " + std::to_string(k) + " outside [1, 24]");
  }
  if (depth_cap < 0 || depth_cap > kMaxBits) {
    throw ArgumentError("depth cap " + std::to_string(depth_cap) + " outside [0, 60]");
  }
  const std::uint64_t count = std::uint64_t{1} << k;
  std::vector<BucketRegion> out;
  out.reserve(count);
  for (std::uint64_t c = 0; c < count; ++c) {
    BucketRegion r;
    r.prefix = {c, k};
    r.interval = balanced_decode(model, r.prefix);
    r.cells = dyadic_cover(r.interval, depth_cap);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bgh
