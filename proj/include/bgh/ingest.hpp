// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "bgh/balanced_model.hpp"
#include "bgh/geohash.hpp"

namespace bgh {

/// Reads `lat,lon[,weight]` CSV. The header is mandatory; the weight column
/// defaults to 1. Errors carry the 1-based line number.
std::vector<WeightedPoint> read_points_csv(std::istream& in);
std::vector<WeightedPoint> read_points_csv(const std::filesystem::path& path);

/// Always writes the weight column. Coordinates use the shortest text that
/// reads back to the same double.
std::string write_points_csv(std::span<const WeightedPoint> points);

struct MixtureComponent {
  GeoPoint center;
  double sigma_lat = 1.0;
  double sigma_lon = 1.0;
  double weight = 1.0;
};

/// A Gaussian mixture over the globe plus a uniform background.
struct MixtureSpec {
  std::vector<MixtureComponent> components;
  double uniform_floor = 0.0;
  std::uint64_t seed = 0;

  /// Weights positive, sigmas positive, centers valid, and the component
  /// weights plus uniform_floor sum to 1 (within 1e-9).
  void validate() const;

  /// JSON object: {"components": [{"lat", "lon", "sigma_lat", "sigma_lon",
  /// "weight"}...], "uniform_floor": x, "seed": n}. seed is optional.
  static MixtureSpec from_json(const std::string& text);
  std::string to_json() const;
};

/// n unit-weight samples, fully determined by (spec, n).
///
/// Generator, frozen: std::mt19937_64 seeded with spec.seed. A uniform
/// double is (next() >> 11) * 2^-53. Each sample draws one uniform to pick
/// the uniform background (u < uniform_floor) or a component by cumulative
/// weight. Background points are lat = -90 + 180u, lon = -180 + 360u'.
/// Component points use Box-Muller pairs (u1 taken as 1 - uniform so the log
/// is finite; z_lat = r cos(2 pi u2), z_lon = r sin(2 pi u2)), and a pair
/// is redrawn while |z| > 6 on either axis or the point falls outside
/// [-90, 90) x [-180, 180).
std::vector<WeightedPoint> synth_mixture(const MixtureSpec& spec, std::size_t n);

/// GeoJSON FeatureCollection, one MultiPolygon feature per bucket with
/// properties {prefix, index}; empty buckets get empty coordinates and
/// `"empty": true`. Rings are closed, counterclockwise, lon before lat.
std::string export_buckets_geojson(std::span<const BucketRegion> regions);

}  // namespace bgh
