// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgh/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bgh/error.hpp"

namespace bgh {

namespace {

double entropy_of_sorted(std::span<const std::uint64_t> keys, std::span<const std::uint64_t> weights,
                         int shift, long double total) {
  double h = 0.0;
  std::size_t i = 0;
  while (i < keys.size()) {
    const std::uint64_t bucket = keys[i] >> shift;
    unsigned __int128 mass = 0;
    for (; i < keys.size() && (keys[i] >> shift) == bucket; ++i) mass += weights[i];
    const double p = static_cast<double>(static_cast<long double>(mass) / total);
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double entropy(std::span<const std::uint64_t> counts) {
  unsigned __int128 total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw ArgumentError("entropy of an empty histogram");
  const auto t = static_cast<long double>(total);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(static_cast<long double>(c) / t);
    h -= p * std::log2(p);
  }
  return h;
}

std::string EntropyReport::to_csv() const {
  std::string out = "scheme,bits,entropy,entropy_per_bit\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%d,%.12g,%.12g\n", r.bits, r.entropy, r.entropy_per_bit);
    out += r.scheme;
    out += buf;
  }
  return out;
}

namespace {

// Hash values on the 2^63 scale, sorted, with weights in matching order.
void sorted_values(std::span<const WeightedPoint> points, const BalancedModel* model,
                   std::vector<std::uint64_t>& keys, std::vector<std::uint64_t>& weights,
                   unsigned __int128& total) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> kv;
  kv.reserve(points.size());
  total = 0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].weight == 0) continue;
    std::uint64_t v = 0;
    try {
      v = standard_value(points[j].point);
    } catch (const Error& e) {
      throw DomainError("row " + std::to_string(j + 1) + ": " + e.what());
    }
    if (model != nullptr) v = model->forward(v);
    kv.emplace_back(v, points[j].weight);
    total += points[j].weight;
  }
  if (total == 0) throw ArgumentError("no points with positive weight");
  std::sort(kv.begin(), kv.end());
  keys.resize(kv.size());
  weights.resize(kv.size());
  for (std::size_t i = 0; i < kv.size(); ++i) {
    keys[i] = kv[i].first;
    weights[i] = kv[i].second;
  }
}

void check_precision(int bits) {
  if (bits < 1 || bits > kMaxBits) {
    throw ArgumentError("precision " + std::to_string(bits) + " outside [1, 60]");
  }
}

}  // namespace

std::vector<std::pair<std::uint64_t, std::uint64_t>> prefix_histogram(
    std::span<const WeightedPoint> points, const BalancedModel* model, int bits) {
  check_precision(bits);
  std::vector<std::uint64_t> keys, weights;
  unsigned __int128 total = 0;
  sorted_values(points, model, keys, weights, total);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  const int shift = kFixedBits - bits;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::uint64_t bucket = keys[i] >> shift;
    if (out.empty() || out.back().first != bucket) out.emplace_back(bucket, 0);
    out.back().second += weights[i];
  }
  return out;
}

EntropyReport entropy_curve(std::span<const WeightedPoint> points, const BalancedModel* model,
                            std::span<const int> precisions) {
  if (points.empty()) throw ArgumentError("entropy curve needs at least one point");
  if (precisions.empty()) throw ArgumentError("entropy curve needs at least one precision");
  for (int m : precisions) check_precision(m);
  std::vector<std::uint64_t> keys, weights;
  unsigned __int128 total = 0;
  sorted_values(points, model, keys, weights, total);
  EntropyReport report;
  const std::string label = model == nullptr ? "standard" : "balanced";
  for (int m : precisions) {
    const double h = entropy_of_sorted(keys, weights, kFixedBits - m, static_cast<long double>(total));
    report.rows.push_back({label, m, h, h / m});
  }
  return report;
}

BoundResult theorem_bound(int q, double n, double a) {
  if (q < 1) throw ArgumentError("q must be at least 1");
  if (!(n >= 1.0) || !std::isfinite(n)) throw ArgumentError("n must be at least 1");
  if (!(a >= 0.0 && a <= 1.0)) throw ArgumentError("a must lie in [0, 1]");
  const double shrink = n / (n + 2.0);
  const double gap = 1.0 - a;
  return {q * shrink * a, 1.0 - 2.0 * std::exp(-0.49 * std::ldexp(1.0, -2 * q) * n * gap * gap)};
}

}  // namespace bgh
