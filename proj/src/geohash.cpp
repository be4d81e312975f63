// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgh/geohash.hpp"

#include <array>
#include <cmath>
#include <string>

#include "bgh/error.hpp"

namespace bgh {

namespace {

constexpr std::string_view kBase32Alphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
constexpr int kHalfBits = kUnitBits / 2;
constexpr std::uint64_t kUnitOne = std::uint64_t{1} << kUnitBits;

__int128 floor_div(__int128 num, __int128 den, bool& exact) {
  __int128 q = num / den;
  __int128 r = num % den;
  exact = (r == 0);
  if (r != 0 && ((r < 0) != (den < 0))) --q;
  return q;
}

// floor(v * 2^shift / 45) computed exactly from the binary expansion of v.
// |v| <= 180 so the result is within +-2^59 for the shifts used here.
__int128 scaled_floor(double v, int shift, bool& exact) {
  if (v == 0.0) {
    exact = true;
    return 0;
  }
  int e = 0;
  const double f = std::frexp(v, &e);
  const auto mantissa = static_cast<std::int64_t>(std::ldexp(f, 53));
  const int s = e - 53 + shift;
  if (s >= 0) return floor_div(static_cast<__int128>(mantissa) * (static_cast<__int128>(1) << s), 45, exact);
  if (-s <= 100) return floor_div(mantissa, static_cast<__int128>(45) << -s, exact);
  exact = false;
  return mantissa > 0 ? 0 : -1;
}

// 2^59 + floor(v * 2^60 / span) for span = 360 (shift 57) or 180 (shift 58).
ScaledCoord scale(double v, int shift) {
  bool exact = false;
  const __int128 r = scaled_floor(v, shift, exact);
  return {static_cast<std::uint64_t>((static_cast<__int128>(1) << 59) + r), exact};
}

void check_bits(int bits, int lo) {
  if (bits < lo || bits > kMaxBits) {
    throw ArgumentError("bit count " + std::to_string(bits) + " outside [" +
                        std::to_string(lo) + ", 60]");
  }
}

}  // namespace

namespace detail {

std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0xFFFFFFFFull;
  v = (v | (v << 16)) & 0x0000FFFF0000FFFFull;
  v = (v | (v << 8)) & 0x00FF00FF00FF00FFull;
  v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0Full;
  v = (v | (v << 2)) & 0x3333333333333333ull;
  v = (v | (v << 1)) & 0x5555555555555555ull;
  return v;
}

std::uint64_t compact_bits(std::uint64_t v) {
  v &= 0x5555555555555555ull;
  v = (v | (v >> 1)) & 0x3333333333333333ull;
  v = (v | (v >> 2)) & 0x0F0F0F0F0F0F0F0Full;
  v = (v | (v >> 4)) & 0x00FF00FF00FF00FFull;
  v = (v | (v >> 8)) & 0x0000FFFF0000FFFFull;
  v = (v | (v >> 16)) & 0x00000000FFFFFFFFull;
  return v;
}

}  // namespace detail

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || p.lat < -90.0 || p.lat >= 90.0) {
    throw DomainError("lat out of range: " + std::to_string(p.lat));
  }
  if (!std::isfinite(p.lon) || p.lon < -180.0 || p.lon >= 180.0) {
    throw DomainError("lon out of range: " + std::to_string(p.lon));
  }
}

double UnitPoint::x_value() const { return std::ldexp(static_cast<double>(x), -kUnitBits); }
double UnitPoint::y_value() const { return std::ldexp(static_cast<double>(y), -kUnitBits); }

UnitPoint to_unit(const GeoPoint& p) {
  validate(p);
  return {scale(p.lon, 57).floor, scale(p.lat, 58).floor};
}

ScaledCoord scale_lon(double lon) {
  if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0) {
    throw DomainError("lon out of range: " + std::to_string(lon));
  }
  return scale(lon, 57);
}

ScaledCoord scale_lat(double lat) {
  if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) {
    throw DomainError("lat out of range: " + std::to_string(lat));
  }
  return scale(lat, 58);
}

double HashCode::value() const { return std::ldexp(static_cast<double>(code), -bits); }

HashCode HashCode::prefix(int q) const {
  if (q < 0 || q > bits) {
    throw ArgumentError("prefix length " + std::to_string(q) + " exceeds " +
                        std::to_string(bits) + " bits");
  }
  return {q == 0 ? 0 : code >> (bits - q), q};
}

bool HashCode::is_prefix_of(const HashCode& other) const {
  return bits <= other.bits && other.prefix(bits).code == code;
}

std::string HashCode::bit_string() const {
  std::string out(static_cast<std::size_t>(bits), '0');
  for (int i = 0; i < bits; ++i) {
    if ((code >> (bits - 1 - i)) & 1u) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

HashCode parse_bit_string(std::string_view text) {
  if (text.empty() || text.size() > static_cast<std::size_t>(kMaxBits)) {
    throw ParseError("bit string length must be 1..60, got " + std::to_string(text.size()));
  }
  HashCode h{0, static_cast<int>(text.size())};
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') {
      throw ParseError("invalid bit character '" + std::string(1, text[i]) + "' at position " +
                       std::to_string(i));
    }
    h.code = (h.code << 1) | static_cast<std::uint64_t>(text[i] - '0');
  }
  return h;
}

HashCode encode(const UnitPoint& u, int bits) {
  check_bits(bits, 1);
  if (u.x >= kUnitOne || u.y >= kUnitOne) throw DomainError("unit point outside [0,1)");
  const std::uint64_t full = (detail::spread_bits(u.x >> kHalfBits) << 1) |
                             detail::spread_bits(u.y >> kHalfBits);
  return {full >> (kMaxBits - bits), bits};
}

HashCode encode(const GeoPoint& p, int bits) { return encode(to_unit(p), bits); }

CellRect cell_rect(std::uint64_t prefix, int depth) {
  check_bits(depth, 0);
  if (depth < 64 && (prefix >> depth) != 0) {
    throw ArgumentError("prefix does not fit in " + std::to_string(depth) + " bits");
  }
  const std::uint64_t full = depth == 0 ? 0 : prefix << (kMaxBits - depth);
  const int lon_bits = (depth + 1) / 2;
  const int lat_bits = depth / 2;
  const std::uint64_t xi = detail::compact_bits(full >> 1) >> (kHalfBits - lon_bits);
  const std::uint64_t yi = detail::compact_bits(full) >> (kHalfBits - lat_bits);
  // Multiples of 360/2^30 within +-180 are exact in a double.
  CellRect r;
  r.lon_min = -180.0 + std::ldexp(360.0 * static_cast<double>(xi), -lon_bits);
  r.lon_max = -180.0 + std::ldexp(360.0 * static_cast<double>(xi + 1), -lon_bits);
  r.lat_min = -90.0 + std::ldexp(180.0 * static_cast<double>(yi), -lat_bits);
  r.lat_max = -90.0 + std::ldexp(180.0 * static_cast<double>(yi + 1), -lat_bits);
  return r;
}

CellRect decode_cell(const HashCode& h) {
  check_bits(h.bits, 1);
  return cell_rect(h.code, h.bits);
}

std::string render_base32(const HashCode& h) {
  check_bits(h.bits, 1);
  if (h.bits % 5 != 0) {
    throw ArgumentError("base-32 rendering needs a multiple of 5 bits, got " +
                        std::to_string(h.bits));
  }
  std::string out;
  out.reserve(static_cast<std::size_t>(h.bits / 5));
  for (int shift = h.bits - 5; shift >= 0; shift -= 5) {
    out.push_back(kBase32Alphabet[(h.code >> shift) & 0x1F]);
  }
  return out;
}

HashCode parse_base32(std::string_view text) {
  if (text.empty() || text.size() > static_cast<std::size_t>(kMaxBits / 5)) {
    throw ParseError("base-32 geohash length must be 1..12, got " + std::to_string(text.size()));
  }
  HashCode h{0, static_cast<int>(text.size()) * 5};
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto pos = kBase32Alphabet.find(text[i]);
    if (pos == std::string_view::npos) {
      throw ParseError("invalid base-32 character '" + std::string(1, text[i]) +
                       "' at position " + std::to_string(i));
    }
    h.code = (h.code << 5) | pos;
  }
  return h;
}

}  // namespace bgh
