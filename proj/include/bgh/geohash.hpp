// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace bgh {

/// Longest hash supported: one 64-bit word, and a multiple of 5 for base-32.
inline constexpr int kMaxBits = 60;

/// Unit-square coordinates carry this many fraction bits.
inline constexpr int kUnitBits = 60;

/// Latitude/longitude in degrees. Valid points have lat in [-90, 90) and
/// lon in [-180, 180); the closed upper edges are rejected, callers wrap.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Throws DomainError naming the field when `p` is non-finite or out of range.
void validate(const GeoPoint& p);

/// A point of the unit square as exact binary fractions x/2^60 and y/2^60.
/// x comes from longitude, y from latitude.
struct UnitPoint {
  std::uint64_t x = 0;
  std::uint64_t y = 0;

  double x_value() const;
  double y_value() const;

  friend bool operator==(const UnitPoint&, const UnitPoint&) = default;
};

/// Linear map of a validated GeoPoint into the unit square. All 60 fraction
/// bits are the exact floor of (lon+180)/360 and (lat+90)/180; no rounding
/// happens on the way.
UnitPoint to_unit(const GeoPoint& p);

/// Floor of a coordinate scaled onto the 60-bit unit grid, plus whether the
/// scaled value was an integer. Unlike to_unit, the closed upper bound
/// (lon 180, lat 90) is accepted and maps to 2^60. Used for box queries.
struct ScaledCoord {
  std::uint64_t floor = 0;
  bool exact = false;
};
ScaledCoord scale_lon(double lon);
ScaledCoord scale_lat(double lat);

/// An m-bit interleaved hash. value() == code / 2^bits.
struct HashCode {
  std::uint64_t code = 0;
  int bits = 0;

  double value() const;

  /// The first `q` bits, q <= bits.
  HashCode prefix(int q) const;
  bool is_prefix_of(const HashCode& other) const;

  /// Most significant bit first, e.g. "0110".
  std::string bit_string() const;

  friend bool operator==(const HashCode&, const HashCode&) = default;
};

/// Parses a string of '0'/'1' characters (1..60 of them).
HashCode parse_bit_string(std::string_view text);

/// Interleaves the binary digits of x and y: bit k (1-based, most
/// significant first) is x_{(k+1)/2} for odd k and y_{k/2} for even k.
HashCode encode(const UnitPoint& u, int bits);

/// Shorthand for encode(to_unit(p), bits).
HashCode encode(const GeoPoint& p, int bits);

/// Degree rectangle [lat_min, lat_max) x [lon_min, lon_max).
struct CellRect {
  double lat_min = -90.0;
  double lat_max = 90.0;
  double lon_min = -180.0;
  double lon_max = 180.0;

  bool contains(const GeoPoint& p) const {
    return p.lat >= lat_min && p.lat < lat_max && p.lon >= lon_min && p.lon < lon_max;
  }
  bool contains(const CellRect& r) const {
    return r.lat_min >= lat_min && r.lat_max <= lat_max && r.lon_min >= lon_min &&
           r.lon_max <= lon_max;
  }
  bool empty() const { return !(lat_min < lat_max && lon_min < lon_max); }

  friend bool operator==(const CellRect&, const CellRect&) = default;
};

/// The set of all points whose hash starts with `h`.
CellRect decode_cell(const HashCode& h);

/// Same as decode_cell for a `depth`-bit prefix; depth 0 is the whole world.
CellRect cell_rect(std::uint64_t prefix, int depth);

/// Conventional geohash text, 5 bits per character. bits % 5 must be 0.
std::string render_base32(const HashCode& h);
HashCode parse_base32(std::string_view text);

namespace detail {

/// Spreads the low 32 bits of v to the even bit positions.
std::uint64_t spread_bits(std::uint64_t v);
/// Inverse of spread_bits: gathers the even bit positions.
std::uint64_t compact_bits(std::uint64_t v);

}  // namespace detail

}  // namespace bgh
