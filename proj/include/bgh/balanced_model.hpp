// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bgh/geohash.hpp"

namespace bgh {

/// Balanced-model arithmetic works on fractions of 2^63.
inline constexpr int kFixedBits = 63;
inline constexpr std::uint64_t kFixedOne = std::uint64_t{1} << kFixedBits;
inline constexpr int kMaxBalanceDepth = 24;

/// A location with a multiplicity (a census count, say). Zero weights are
/// legal and ignored by fitting.
struct WeightedPoint {
  GeoPoint point;
  std::uint64_t weight = 1;

  friend bool operator==(const WeightedPoint&, const WeightedPoint&) = default;
};

/// A standard hash value on the 2^63 scale together with its weight.
struct WeightedHash {
  std::uint64_t value = 0;
  std::uint64_t weight = 1;
};

/// The 60-bit standard hash of `p` as a fraction of 2^63.
std::uint64_t standard_value(const GeoPoint& p);

/// Half-open interval [lo, hi) on the 2^63 scale; hi may equal kFixedOne.
struct HashInterval {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool empty() const { return lo >= hi; }
  bool contains(std::uint64_t v) const { return lo <= v && v < hi; }
  double lo_value() const;
  double hi_value() const;
  double width() const;

  friend bool operator==(const HashInterval&, const HashInterval&) = default;
};

/// Piecewise-linear monotone map between standard-hash space and balanced
/// space. Breakpoint s_i is the standard value sent to i/2^q; values between
/// breakpoints are interpolated. Immutable once built.
class BalancedModel {
 public:
  /// Validates every invariant; throws ArgumentError naming the first
  /// violated one.
  static BalancedModel from_breakpoints(int q, std::vector<std::uint64_t> breakpoints,
                                        std::uint64_t n_points, std::uint64_t total_weight);

  /// Breakpoints i/2^q, i.e. the standard geohash. n_points is chosen as
  /// 2^(q+1) - 2 so that N/(N+2) = 1 - 2^-q admits the top breakpoint.
  static BalancedModel identity(int q);

  int q() const { return q_; }
  std::size_t bucket_count() const { return breakpoints_.size() - 1; }
  std::span<const std::uint64_t> breakpoints() const { return breakpoints_; }
  std::uint64_t n_points() const { return n_points_; }
  std::uint64_t total_weight() const { return total_weight_; }

  /// Standard value -> balanced value, both on the 2^63 scale, floor rounded.
  /// A value on a shared breakpoint goes to the lowest bucket of positive
  /// width to its right.
  std::uint64_t forward(std::uint64_t standard) const;

  /// Smallest standard value whose forward image is >= `balanced`.
  /// Accepts balanced == kFixedOne and returns kFixedOne.
  std::uint64_t lower_preimage(std::uint64_t balanced) const;

  /// Standard-space extent [s_i, s_{i+1}) of top-level bucket i.
  HashInterval bucket(std::size_t i) const;

  friend bool operator==(const BalancedModel&, const BalancedModel&) = default;

 private:
  BalancedModel() = default;

  int q_ = 0;
  std::vector<std::uint64_t> breakpoints_;
  std::uint64_t n_points_ = 0;
  std::uint64_t total_weight_ = 0;
};

/// Fits the entropy-balanced map at depth q from weighted samples.
///
/// With G the weighted ECDF of the samples' standard hash values and N the
/// number of distinct values, interior breakpoints are
/// s_i = N/(N+2) * G^{-1}(i/2^q), where G^{-1}(p) is the ceil(p*W)-th
/// smallest value counting each sample `weight` times.
BalancedModel fit(std::span<const WeightedPoint> points, int q);
BalancedModel fit_hashes(std::vector<WeightedHash> hashes, int q);

/// First `bits` bits of the balanced hash of a point.
HashCode balanced_encode(const BalancedModel& model, const GeoPoint& p, int bits);
HashCode balanced_encode_value(const BalancedModel& model, std::uint64_t standard, int bits);

/// Exact standard-space preimage of the balanced cell `h`. Empty (lo == hi)
/// when no standard value maps into the cell.
HashInterval balanced_decode(const BalancedModel& model, const HashCode& h);

/// One dyadic standard-hash cell: a `depth`-bit prefix and its rectangle.
struct DyadicCell {
  std::uint64_t prefix = 0;
  int depth = 0;
  CellRect rect;

  HashInterval interval() const;
};

/// Maximal dyadic cells covering `interval` after rounding its ends outward
/// to the 2^-depth_cap grid.
std::vector<DyadicCell> dyadic_cover(const HashInterval& interval, int depth_cap);

struct BucketRegion {
  HashCode prefix;
  HashInterval interval;
  std::vector<DyadicCell> cells;

  bool empty() const { return interval.empty(); }
};

/// For each of the 2^k balanced prefixes, its standard interval and a
/// dyadic-cell cover of that interval. Buckets are returned in prefix order.
std::vector<BucketRegion> bucket_regions(const BalancedModel& model, int k, int depth_cap);

/// Binary model format (little-endian):
///   "BGH1" | version=1 | q | 0 0 | N:u64 | W:u64 | (2^q+1) x u64 | crc32
/// The CRC-32 (zlib polynomial) covers everything before it.
std::vector<std::uint8_t> serialize(const BalancedModel& model);
BalancedModel deserialize(std::span<const std::uint8_t> bytes);

/// Writes through a temporary file and renames it into place.
void save(const BalancedModel& model, const std::filesystem::path& path);
BalancedModel load(const std::filesystem::path& path);

}  // namespace bgh
