// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgh/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "json.hpp"

#include "bgh/error.hpp"

namespace bgh {

namespace {

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t at = 0;
  while (true) {
    const auto comma = line.find(',', at);
    out.push_back(line.substr(at, comma == std::string_view::npos ? comma : comma - at));
    if (comma == std::string_view::npos) break;
    at = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, const char* name, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(std::string("malformed ") + name + " at line " + std::to_string(line));
  }
  return v;
}

}  // namespace

std::vector<WeightedPoint> read_points_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("missing header at line 1");
  const std::string_view header = trim_cr(line);
  bool weighted = false;
  if (header == "lat,lon,weight") {
    weighted = true;
  } else if (header != "lat,lon") {
    throw ParseError("header must be 'lat,lon' or 'lat,lon,weight' at line 1");
  }

  std::vector<WeightedPoint> points;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = trim_cr(line);
    if (row.empty()) continue;
    const auto fields = split(row);
    if (fields.size() != (weighted ? 3u : 2u)) {
      throw ParseError("expected " + std::to_string(weighted ? 3 : 2) + " fields at line " +
                       std::to_string(lineno));
    }
    WeightedPoint wp;
    wp.point.lat = parse_double(fields[0], "lat", lineno);
    wp.point.lon = parse_double(fields[1], "lon", lineno);
    if (!std::isfinite(wp.point.lat) || wp.point.lat < -90.0 || wp.point.lat >= 90.0) {
      throw DomainError("lat out of range at line " + std::to_string(lineno));
    }
    if (!std::isfinite(wp.point.lon) || wp.point.lon < -180.0 || wp.point.lon >= 180.0) {
      throw DomainError("lon out of range at line " + std::to_string(lineno));
    }
    if (weighted) {
      const auto f = fields[2];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), wp.weight);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError("malformed weight at line " + std::to_string(lineno));
      }
    }
    points.push_back(wp);
  }
  if (in.bad()) throw IoError("read failed at line " + std::to_string(lineno));
  return points;
}

std::vector<WeightedPoint> read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_points_csv(in);
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string write_points_csv(std::span<const WeightedPoint> points) {
  std::string out = "lat,lon,weight\n";
  char buf[96];
  for (const auto& p : points) {
    auto* end = std::to_chars(buf, buf + sizeof buf, p.point.lat).ptr;
    *end++ = ',';
    end = std::to_chars(end, buf + sizeof buf, p.point.lon).ptr;
    *end++ = ',';
    end = std::to_chars(end, buf + sizeof buf, p.weight).ptr;
    *end++ = '\n';
    out.append(buf, end);
  }
  return out;
}

void MixtureSpec::validate() const {
  if (!(uniform_floor >= 0.0 && uniform_floor <= 1.0)) {
    throw ArgumentError("uniform_floor must lie in [0, 1]");
  }
  double sum = uniform_floor;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    const std::string at = "component " + std::to_string(i) + ": ";
    if (!(c.weight > 0.0)) throw ArgumentError(at + "weight must be positive");
    if (!(c.sigma_lat > 0.0) || !(c.sigma_lon > 0.0) || !std::isfinite(c.sigma_lat) ||
        !std::isfinite(c.sigma_lon)) {
      throw ArgumentError(at + "sigmas must be positive");
    }
    try {
      bgh::validate(c.center);
    } catch (const DomainError& e) {
      throw ArgumentError(at + e.what());
    }
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ArgumentError("mixture weights plus uniform_floor must sum to 1, got " +
                        std::to_string(sum));
  }
}

MixtureSpec MixtureSpec::from_json(const std::string& text) {
  MixtureSpec spec;
  try {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& c : doc.at("components")) {
      MixtureComponent mc;
      mc.center = {c.at("lat").get<double>(), c.at("lon").get<double>()};
      mc.sigma_lat = c.at("sigma_lat").get<double>();
      mc.sigma_lon = c.at("sigma_lon").get<double>();
      mc.weight = c.at("weight").get<double>();
      spec.components.push_back(mc);
    }
    spec.uniform_floor = doc.value("uniform_floor", 0.0);
    spec.seed = doc.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mixture spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string MixtureSpec::to_json() const {
  nlohmann::json doc;
  doc["components"] = nlohmann::json::array();
  for (const auto& c : components) {
    doc["components"].push_back({{"lat", c.center.lat},
                                 {"lon", c.center.lon},
                                 {"sigma_lat", c.sigma_lat},
                                 {"sigma_lon", c.sigma_lon},
                                 {"weight", c.weight}});
  }
  doc["uniform_floor"] = uniform_floor;
  doc["seed"] = seed;
  return doc.dump(2);
}

std::vector<WeightedPoint> synth_mixture(const MixtureSpec& spec, std::size_t n) {
  spec.validate();
  if (n < 1) throw ArgumentError("sample count must be at least 1");
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<double> cumulative;
  double acc = spec.uniform_floor;
  for (const auto& c : spec.components) cumulative.push_back(acc += c.weight);

  std::vector<WeightedPoint> out;
  out.reserve(n);
  while (out.size() < n) {
    const double pick = uniform();
    std::size_t k = 0;
    while (k < cumulative.size() && pick >= cumulative[k]) ++k;
    if (pick < spec.uniform_floor || spec.components.empty()) {
      const double lat = -90.0 + 180.0 * uniform();
      const double lon = -180.0 + 360.0 * uniform();
      out.push_back({{lat, lon}, 1});
      continue;
    }
    const auto& c = spec.components[std::min(k, spec.components.size() - 1)];
    while (true) {
      const double u1 = 1.0 - uniform();
      const double u2 = uniform();
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double z_lat = r * std::cos(2.0 * std::numbers::pi * u2);
      const double z_lon = r * std::sin(2.0 * std::numbers::pi * u2);
      if (std::abs(z_lat) > 6.0 || std::abs(z_lon) > 6.0) continue;
      const GeoPoint p{c.center.lat + c.sigma_lat * z_lat, c.center.lon + c.sigma_lon * z_lon};
      if (p.lat < -90.0 || p.lat >= 90.0 || p.lon < -180.0 || p.lon >= 180.0) continue;
      out.push_back({p, 1});
      break;
    }
  }
  return out;
}

std::string export_buckets_geojson(std::span<const BucketRegion> regions) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    nlohmann::json polygons = nlohmann::json::array();
    for (const auto& cell : r.cells) {
      const auto& c = cell.rect;
      nlohmann::json ring = {{c.lon_min, c.lat_min},
                             {c.lon_max, c.lat_min},
                             {c.lon_max, c.lat_max},
                             {c.lon_min, c.lat_max},
                             {c.lon_min, c.lat_min}};
      polygons.push_back(nlohmann::json::array({ring}));
    }
    nlohmann::json props = {{"prefix", r.prefix.bits == 0 ? "" : r.prefix.bit_string()},
                            {"index", i}};
    if (r.empty()) props["empty"] = true;
    features.push_back({{"type", "Feature"},
                        {"properties", props},
                        {"geometry", {{"type", "MultiPolygon"}, {"coordinates", polygons}}}});
  }
  const nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump() + "\n";
}

}  // namespace bgh
