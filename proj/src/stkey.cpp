// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgh/stkey.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"

#include "bgh/error.hpp"

namespace bgh {

namespace {

constexpr std::size_t kFrontierLimit = std::size_t{1} << 16;
constexpr std::uint64_t kUnitOne = std::uint64_t{1} << kUnitBits;

std::string hex(std::uint64_t v, int digits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(digits), '0');
  for (int i = digits - 1; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return out;
}

std::string decimal12(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%012llu", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size() ||
      std::any_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'F'; })) {
    throw ParseError("invalid hex " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void StKeyConfig::validate() const {
  if (prefix_bits < 4 || prefix_bits > 40 || prefix_bits % 4 != 0) {
    throw ArgumentError("prefix bits must be a multiple of 4 in [4, 40], got " +
                        std::to_string(prefix_bits));
  }
  if (suffix_bits < 0 || suffix_bits % 4 != 0 || prefix_bits + suffix_bits > kMaxBits) {
    throw ArgumentError("suffix bits must be a multiple of 4 with prefix + suffix <= 60, got " +
                        std::to_string(suffix_bits));
  }
  if (time_resolution <= 0) {
    throw ArgumentError("time resolution must be positive, got " + std::to_string(time_resolution));
  }
}

std::string StKey::render() const {
  return hex(prefix, prefix_bits / 4) + ":" + decimal12(time_bucket) + ":" +
         hex(suffix, suffix_bits / 4);
}

StKey StKey::parse(std::string_view text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos) {
    throw ParseError("key must have the form <hex>:<12 digits>:<hex>");
  }
  const auto pre = text.substr(0, c1);
  const auto time = text.substr(c1 + 1, c2 - c1 - 1);
  const auto suf = text.substr(c2 + 1);
  if (pre.empty() || pre.size() > 10) throw ParseError("key prefix must have 1..10 hex digits");
  if (pre.size() + suf.size() > 15) throw ParseError("key hash part longer than 60 bits");
  if (time.size() != static_cast<std::size_t>(kTimeDigits) ||
      !std::all_of(time.begin(), time.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ParseError("key time bucket must be 12 decimal digits");
  }
  StKey k;
  k.prefix_bits = static_cast<int>(pre.size()) * 4;
  k.suffix_bits = static_cast<int>(suf.size()) * 4;
  k.prefix = parse_hex(pre, "prefix");
  k.suffix = suf.empty() ? 0 : parse_hex(suf, "suffix");
  std::from_chars(time.data(), time.data() + time.size(), k.time_bucket);
  return k;
}

StKey make_key(const StKeyConfig& config, const BalancedModel& model, const GeoPoint& p,
               std::int64_t epoch_seconds) {
  config.validate();
  if (epoch_seconds < 0) {
    throw ArgumentError("time before 1970-01-01 is not supported: " + std::to_string(epoch_seconds));
  }
  const auto bucket = static_cast<std::uint64_t>(epoch_seconds / config.time_resolution);
  if (bucket >= kTimeBuckets) throw ArgumentError("time bucket exceeds 12 digits");
  const HashCode h = balanced_encode(model, p, config.prefix_bits + config.suffix_bits);
  StKey k;
  k.prefix_bits = config.prefix_bits;
  k.suffix_bits = config.suffix_bits;
  k.prefix = h.code >> config.suffix_bits;
  k.suffix = config.suffix_bits == 0 ? 0 : h.code & ((std::uint64_t{1} << config.suffix_bits) - 1);
  k.time_bucket = bucket;
  return k;
}

std::int64_t parse_utc_timestamp(std::string_view text) {
  using namespace std::chrono;
  auto fail = [&]() -> ParseError {
    return ParseError("invalid UTC timestamp '" + std::string(text) + "'");
  };
  std::string_view s = text;
  if (s.ends_with('Z')) {
    s.remove_suffix(1);
  } else if (s.ends_with("+00:00")) {
    s.remove_suffix(6);
  }
  auto field = [&](std::size_t at, std::size_t len) {
    if (at + len > s.size()) throw fail();
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data() + at, s.data() + at + len, v);
    if (ec != std::errc() || ptr != s.data() + at + len || s[at] == '-' || s[at] == '+') throw fail();
    return v;
  };
  if (s.size() != 10 && s.size() != 19) throw fail();
  if (s[4] != '-' || s[7] != '-') throw fail();
  const year_month_day ymd{year{field(0, 4)}, month{static_cast<unsigned>(field(5, 2))},
                           day{static_cast<unsigned>(field(8, 2))}};
  if (!ymd.ok()) throw fail();
  std::int64_t secs = sys_days{ymd}.time_since_epoch() / seconds{1};
  if (s.size() == 19) {
    if (s[10] != 'T' || s[13] != ':' || s[16] != ':') throw fail();
    const int hh = field(11, 2), mm = field(14, 2), ss = field(17, 2);
    if (hh > 23 || mm > 59 || ss > 59) throw fail();
    secs += hh * 3600 + mm * 60 + ss;
  }
  return secs;
}

double GridInterval::lo_value() const { return std::ldexp(static_cast<double>(lo), -bits); }
double GridInterval::hi_value() const { return std::ldexp(static_cast<double>(hi), -bits); }

namespace {

struct Node {
  std::uint64_t prefix;
  int depth;
  std::uint64_t x0, x1, y0, y1;  // 60-bit unit ranges, upper exclusive
};

struct UnitBox {
  std::uint64_t x_lo, x_hi, y_lo, y_hi;  // inclusive
  bool empty;
};

UnitBox unit_box(const CellRect& bbox) {
  if (!(bbox.lat_min < bbox.lat_max) || !(bbox.lon_min < bbox.lon_max)) {
    throw ArgumentError("bounding box is empty");
  }
  const ScaledCoord x0 = scale_lon(bbox.lon_min), x1 = scale_lon(bbox.lon_max);
  const ScaledCoord y0 = scale_lat(bbox.lat_min), y1 = scale_lat(bbox.lat_max);
  // A point strictly below an exactly representable edge lies on the grid
  // line below it.
  UnitBox b{x0.floor, x1.floor, y0.floor, y1.floor, false};
  if (x1.exact) {
    if (b.x_hi == 0) b.empty = true; else --b.x_hi;
  }
  if (y1.exact) {
    if (b.y_hi == 0) b.empty = true; else --b.y_hi;
  }
  b.x_hi = std::min(b.x_hi, kUnitOne - 1);
  b.y_hi = std::min(b.y_hi, kUnitOne - 1);
  if (b.x_hi < b.x_lo || b.y_hi < b.y_lo) b.empty = true;
  return b;
}

// Balanced image of a cell on the 2^-bits grid, rounded outward.
GridInterval image(const BalancedModel& model, const Node& n, int bits) {
  const int shift = kFixedBits - n.depth;
  const std::uint64_t a = n.prefix << shift;
  const std::uint64_t b = ((n.prefix + 1) << shift) - 1;
  const int grid = kFixedBits - bits;
  return {model.forward(a) >> grid, (model.forward(b) >> grid) + 1, bits};
}

std::vector<GridInterval> raw_cover(const BalancedModel& model, const CellRect& bbox, int bits,
                                    std::size_t frontier_limit) {
  if (bits < 1 || bits > kMaxBits) {
    throw ArgumentError("bit count " + std::to_string(bits) + " outside [1, 60]");
  }
  const UnitBox box = unit_box(bbox);
  std::vector<GridInterval> out;
  if (box.empty) return out;

  std::vector<Node> level{{0, 0, 0, kUnitOne, 0, kUnitOne}};
  std::vector<Node> partial;
  while (!level.empty()) {
    partial.clear();
    for (const Node& n : level) {
      if (n.x1 <= box.x_lo || n.x0 > box.x_hi || n.y1 <= box.y_lo || n.y0 > box.y_hi) continue;
      const bool inside =
          n.x0 >= box.x_lo && n.x1 - 1 <= box.x_hi && n.y0 >= box.y_lo && n.y1 - 1 <= box.y_hi;
      const GridInterval img = image(model, n, bits);
      if (inside || n.depth == kMaxBits || img.hi - img.lo <= 1) {
        out.push_back(img);
      } else {
        partial.push_back(n);
      }
    }
    if (2 * partial.size() > frontier_limit) {
      for (const Node& n : partial) out.push_back(image(model, n, bits));
      break;
    }
    level.clear();
    for (const Node& n : partial) {
      const int d = n.depth + 1;
      Node lo = n, hi = n;
      lo.depth = hi.depth = d;
      lo.prefix = n.prefix << 1;
      hi.prefix = (n.prefix << 1) | 1;
      if (d % 2 == 1) {
        const std::uint64_t mid = n.x0 + (n.x1 - n.x0) / 2;
        lo.x1 = mid;
        hi.x0 = mid;
      } else {
        const std::uint64_t mid = n.y0 + (n.y1 - n.y0) / 2;
        lo.y1 = mid;
        hi.y0 = mid;
      }
      level.push_back(lo);
      level.push_back(hi);
    }
  }

  std::sort(out.begin(), out.end(),
            [](const GridInterval& a, const GridInterval& b) { return a.lo < b.lo; });
  std::vector<GridInterval> merged;
  for (const auto& iv : out) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

// Closes the smallest gaps (leftmost first on ties) until `budget` remain.
std::vector<GridInterval> close_gaps(std::vector<GridInterval> ivs, std::size_t budget) {
  if (ivs.size() <= budget) return ivs;
  std::vector<std::size_t> order(ivs.size() - 1);
  std::iota(order.begin(), order.end(), 0);
  auto gap = [&](std::size_t i) { return ivs[i + 1].lo - ivs[i].hi; };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gap(a) < gap(b); });
  std::vector<bool> closed(ivs.size() - 1, false);
  for (std::size_t k = 0; k < ivs.size() - budget; ++k) closed[order[k]] = true;
  std::vector<GridInterval> out{ivs.front()};
  for (std::size_t i = 1; i < ivs.size(); ++i) {
    if (closed[i - 1]) {
      out.back().hi = ivs[i].hi;
    } else {
      out.push_back(ivs[i]);
    }
  }
  return out;
}

}  // namespace

std::vector<GridInterval> cover_bbox(const BalancedModel& model, const CellRect& bbox, int bits,
                                     std::size_t max_intervals) {
  if (max_intervals < 1) throw ArgumentError("interval budget must be at least 1");
  return close_gaps(raw_cover(model, bbox, bits, kFrontierLimit), max_intervals);
}

std::pair<std::uint64_t, std::uint64_t> time_bucket_span(const StKeyConfig& config,
                                                         std::int64_t t_start, std::int64_t t_end) {
  config.validate();
  if (t_start < 0 || t_end < 0) throw ArgumentError("query times must not precede 1970");
  if (t_start > t_end) throw ArgumentError("query start is after its end");
  const auto first = static_cast<std::uint64_t>(t_start / config.time_resolution);
  const auto last = static_cast<std::uint64_t>(t_end / config.time_resolution);
  if (last >= kTimeBuckets) throw ArgumentError("query end exceeds the 12-digit time bucket range");
  return {first, last};
}

namespace {

// Data-volume accounting for prefix chunks.
class Measure {
 public:
  Measure(const BalancedModel& keys, const BalancedModel* data, int bits)
      : keys_(keys), data_(data), bits_(bits) {}

  // Measure of prefixes [a, b) in balanced units of the data model.
  double span(std::uint64_t a, std::uint64_t b) const {
    if (a >= b) return 0.0;
    if (data_ == nullptr) return std::ldexp(static_cast<double>(b - a), -bits_);
    return std::ldexp(static_cast<double>(at(b) - at(a)), -kFixedBits);
  }

 private:
  std::uint64_t at(std::uint64_t prefix) const {
    const std::uint64_t standard = keys_.lower_preimage(prefix << (kFixedBits - bits_));
    return standard >= kFixedOne ? kFixedOne : data_->forward(standard);
  }

  const BalancedModel& keys_;
  const BalancedModel* data_;
  int bits_;
};

}  // namespace

QueryPlan plan_query(const StKeyConfig& config, const BalancedModel& model, const CellRect& bbox,
                     std::int64_t t_start, std::int64_t t_end, std::size_t max_ranges,
                     const BalancedModel* measure) {
  if (max_ranges < 1) throw ArgumentError("max ranges must be at least 1");
  const auto [first, last] = time_bucket_span(config, t_start, t_end);
  const int p = config.prefix_bits;
  const int digits = p / 4;
  const auto intervals = cover_bbox(model, bbox, p, max_ranges);
  const double horizon = static_cast<double>(kTimeBuckets);
  const double window = static_cast<double>(last - first + 1);
  const bool all_time = first == 0 && last == kTimeBuckets - 1;
  const Measure m(model, measure == &model ? nullptr : measure, p);

  auto range_start = [&](std::uint64_t prefix) {
    return hex(prefix, digits) + ":" + decimal12(first) + ":";
  };
  auto range_end = [&](std::uint64_t prefix) {
    return last + 1 == kTimeBuckets ? hex(prefix, digits) + ";"
                                    : hex(prefix, digits) + ":" + decimal12(last + 1) + ":";
  };

  QueryPlan plan;
  std::vector<double> measures;
  // Prefix chunk [a, b] inclusive: the first prefix from `first` onward, all
  // of the interior prefixes, the last prefix up to `last`.
  auto emit = [&](std::uint64_t a, std::uint64_t b) {
    plan.ranges.push_back({range_start(a), range_end(b)});
    if (a == b) {
      measures.push_back(m.span(a, a + 1) * window);
    } else {
      measures.push_back(m.span(a, a + 1) * (horizon - static_cast<double>(first)) +
                         m.span(a + 1, b) * horizon +
                         m.span(b, b + 1) * static_cast<double>(last + 1));
    }
  };

  if (all_time) {
    for (const auto& iv : intervals) emit(iv.lo, iv.hi - 1);
  } else {
    std::uint64_t total = 0;
    for (const auto& iv : intervals) total += iv.hi - iv.lo;
    std::vector<std::uint64_t> chunks(intervals.size(), 0);
    if (total <= max_ranges) {
      for (std::size_t j = 0; j < intervals.size(); ++j) chunks[j] = intervals[j].hi - intervals[j].lo;
    } else {
      // Smallest chunk length L with sum ceil(n_j / L) <= budget, then hand
      // out the leftover budget so the range count is exactly the budget.
      std::uint64_t lo = 1, hi = 1;
      for (const auto& iv : intervals) hi = std::max(hi, iv.hi - iv.lo);
      auto needed = [&](std::uint64_t len) {
        std::uint64_t n = 0;
        for (const auto& iv : intervals) n += (iv.hi - iv.lo + len - 1) / len;
        return n;
      };
      while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (needed(mid) <= max_ranges) hi = mid; else lo = mid + 1;
      }
      std::uint64_t used = 0;
      for (std::size_t j = 0; j < intervals.size(); ++j) {
        chunks[j] = (intervals[j].hi - intervals[j].lo + lo - 1) / lo;
        used += chunks[j];
      }
      std::uint64_t spare = max_ranges - used;
      for (std::size_t j = 0; j < intervals.size() && spare > 0; ++j) {
        const std::uint64_t add = std::min(spare, intervals[j].hi - intervals[j].lo - chunks[j]);
        chunks[j] += add;
        spare -= add;
      }
    }
    for (std::size_t j = 0; j < intervals.size(); ++j) {
      const std::uint64_t n = intervals[j].hi - intervals[j].lo;
      const std::uint64_t base = n / chunks[j], extra = n % chunks[j];
      std::uint64_t at = intervals[j].lo;
      for (std::uint64_t c = 0; c < chunks[j]; ++c) {
        const std::uint64_t len = base + (c < extra ? 1 : 0);
        emit(at, at + len - 1);
        at += len;
      }
    }
  }

  plan.range_count = plan.ranges.size();
  const double planned = std::accumulate(measures.begin(), measures.end(), 0.0);
  double query = 0.0;
  for (const auto& iv : raw_cover(measure ? *measure : model, bbox, kMaxBits, kFrontierLimit / 4)) {
    query += std::ldexp(static_cast<double>(iv.hi - iv.lo), -kMaxBits);
  }
  query *= window;
  plan.false_positive_measure = query > 0.0 ? std::max(0.0, planned / query - 1.0) : 0.0;
  plan.max_range_share =
      planned > 0.0 ? *std::max_element(measures.begin(), measures.end()) / planned : 0.0;
  return plan;
}

std::string QueryPlan::to_text() const {
  std::string out;
  for (const auto& r : ranges) out += r.start + "\t" + r.end + "\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "# ranges=%zu fp=%.12g max_share=%.12g\n", range_count,
                false_positive_measure, max_range_share);
  return out + buf;
}

std::string QueryPlan::to_json() const {
  nlohmann::json doc;
  doc["ranges"] = nlohmann::json::array();
  for (const auto& r : ranges) doc["ranges"].push_back({{"start", r.start}, {"end", r.end}});
  doc["range_count"] = range_count;
  doc["false_positive_measure"] = false_positive_measure;
  doc["max_range_share"] = max_range_share;
  return doc.dump(2) + "\n";
}

}  // namespace bgh
