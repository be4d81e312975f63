// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "bgh/balanced_model.hpp"
#include "bgh/geohash.hpp"

namespace bgh {

/// Time buckets are rendered as 12 zero-padded decimal digits.
inline constexpr int kTimeDigits = 12;
inline constexpr std::uint64_t kTimeBuckets = 1'000'000'000'000ull;

/// Layout of a spatiotemporal key: p hash bits, then a time bucket, then
/// the next s hash bits. p and s are multiples of 4 (one hex digit each).
struct StKeyConfig {
  int prefix_bits = 16;
  std::int64_t time_resolution = 86400;
  int suffix_bits = 0;

  /// Throws ArgumentError: 4 <= p <= 40, 0 <= s <= 60 - p, both multiples
  /// of 4, resolution positive.
  void validate() const;
};

/// Rendered as `<hex prefix>:<12-digit time bucket>:<hex suffix>`. With
/// fixed widths, string order equals (prefix, time_bucket, suffix) order.
struct StKey {
  std::uint64_t prefix = 0;
  std::uint64_t time_bucket = 0;
  std::uint64_t suffix = 0;
  int prefix_bits = 0;
  int suffix_bits = 0;

  std::string render() const;
  static StKey parse(std::string_view text);

  auto tuple() const { return std::tie(prefix, time_bucket, suffix); }
  friend bool operator==(const StKey&, const StKey&) = default;
};

StKey make_key(const StKeyConfig& config, const BalancedModel& model, const GeoPoint& p,
               std::int64_t epoch_seconds);

/// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SS`, with an optional `Z` or
/// `+00:00` suffix. Result is seconds since 1970-01-01T00:00:00Z.
std::int64_t parse_utc_timestamp(std::string_view text);

/// Grid interval [lo, hi) of `bits`-bit balanced prefixes.
struct GridInterval {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  int bits = 0;

  double lo_value() const;
  double hi_value() const;
  friend bool operator==(const GridInterval&, const GridInterval&) = default;
};

/// Covers the half-open box [lat_min, lat_max) x [lon_min, lon_max) with
/// balanced-hash intervals on the 2^-bits grid.
///
/// The box is decomposed into standard geohash cells by a breadth-first
/// quadtree descent. A partially covered cell is split until its balanced
/// image rounds to a single grid cell, depth 60 is reached, or the frontier
/// would outgrow a fixed budget. Each cell's standard interval is mapped
/// through the (monotone) balanced map and rounded outward. Overlapping or
/// touching intervals merge, then the smallest gaps are closed until at
/// most `max_intervals` remain. Every point of the box lands inside the
/// result.
std::vector<GridInterval> cover_bbox(const BalancedModel& model, const CellRect& bbox, int bits,
                                     std::size_t max_intervals);

struct KeyRange {
  std::string start;  // inclusive
  std::string end;    // exclusive

  friend bool operator==(const KeyRange&, const KeyRange&) = default;
};

struct QueryPlan {
  std::vector<KeyRange> ranges;
  std::size_t range_count = 0;
  /// Planned measure / query measure - 1, in balanced (data-volume) units.
  double false_positive_measure = 0.0;
  /// Largest single range's share of the planned measure.
  double max_range_share = 0.0;

  /// One `start<TAB>end` line per range and a trailing
  /// `# ranges=<n> fp=<x> max_share=<y>` line.
  std::string to_text() const;
  std::string to_json() const;
};

/// Key ranges covering every key whose point lies in `bbox` and whose time
/// lies in [t_start, t_end] (inclusive).
///
/// Measures treat each prefix's balanced width times its number of time
/// buckets as data volume, with the time axis spanning all kTimeBuckets.
/// `measure` selects the model used for that accounting; by default it is
/// `model` itself, where every p-bit prefix weighs 2^-p.
QueryPlan plan_query(const StKeyConfig& config, const BalancedModel& model, const CellRect& bbox,
                     std::int64_t t_start, std::int64_t t_end, std::size_t max_ranges,
                     const BalancedModel* measure = nullptr);

/// Time-bucket interval of a query, [first, last] inclusive.
std::pair<std::uint64_t, std::uint64_t> time_bucket_span(const StKeyConfig& config,
                                                         std::int64_t t_start, std::int64_t t_end);

}  // namespace bgh
