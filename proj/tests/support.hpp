// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only oracles and generators. Nothing here calls into the code paths
// it is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bgh/balanced_model.hpp"
#include "bgh/geohash.hpp"

namespace bgh::testing {

/// Seeded source of uniform doubles and integers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  GeoPoint point() { return {uniform(-90.0, 90.0), uniform(-180.0, 180.0)}; }

 private:
  std::mt19937_64 engine_;
};

/// The textbook geohash: repeated interval halving on doubles, longitude
/// first. Midpoints of dyadic subdivisions of [-180,180] are exact doubles,
/// so comparisons against them are exact.
inline std::string reference_geohash(double lat, double lon, int chars) {
  static const char* alphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
  double lat_lo = -90, lat_hi = 90, lon_lo = -180, lon_hi = 180;
  bool lon_turn = true;
  int bit = 0, ch = 0;
  std::string out;
  while (static_cast<int>(out.size()) < chars) {
    if (lon_turn) {
      const double mid = (lon_lo + lon_hi) / 2;
      if (lon >= mid) { ch = ch * 2 + 1; lon_lo = mid; } else { ch = ch * 2; lon_hi = mid; }
    } else {
      const double mid = (lat_lo + lat_hi) / 2;
      if (lat >= mid) { ch = ch * 2 + 1; lat_lo = mid; } else { ch = ch * 2; lat_hi = mid; }
    }
    lon_turn = !lon_turn;
    if (++bit == 5) {
      out += alphabet[ch];
      bit = 0;
      ch = 0;
    }
  }
  return out;
}

/// Same bisection, returning the first `bits` bits as an integer.
inline std::uint64_t reference_bits(double lat, double lon, int bits) {
  double lat_lo = -90, lat_hi = 90, lon_lo = -180, lon_hi = 180;
  std::uint64_t code = 0;
  for (int k = 0; k < bits; ++k) {
    if (k % 2 == 0) {
      const double mid = (lon_lo + lon_hi) / 2;
      const bool up = lon >= mid;
      code = code * 2 + up;
      (up ? lon_lo : lon_hi) = mid;
    } else {
      const double mid = (lat_lo + lat_hi) / 2;
      const bool up = lat >= mid;
      code = code * 2 + up;
      (up ? lat_lo : lat_hi) = mid;
    }
  }
  return code;
}

/// inf{t : G(t) >= p} by direct evaluation of the weighted ECDF at every
/// sample value (quadratic; small inputs only).
inline std::uint64_t brute_quantile(const std::vector<WeightedHash>& samples, long double p) {
  long double total = 0;
  for (const auto& s : samples) total += static_cast<long double>(s.weight);
  std::uint64_t best = UINT64_MAX;
  for (const auto& cand : samples) {
    long double below = 0;
    for (const auto& s : samples) {
      if (s.value <= cand.value) below += static_cast<long double>(s.weight);
    }
    if (below / total >= p && cand.weight > 0) best = std::min(best, cand.value);
  }
  return best;
}

/// -sum p log2 p written out directly.
inline double brute_entropy(const std::vector<double>& masses) {
  double total = 0;
  for (double m : masses) total += m;
  double h = 0;
  for (double m : masses) {
    if (m > 0) h += -(m / total) * std::log2(m / total);
  }
  return h;
}

/// Exact fixed-point fraction v * 2^63 for dyadic v.
inline std::uint64_t fixed(double v) { return static_cast<std::uint64_t>(std::ldexp(v, 63)); }

}  // namespace bgh::testing
