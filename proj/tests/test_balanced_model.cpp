// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "bgh/balanced_model.hpp"
#include "bgh/error.hpp"
#include "support.hpp"

using namespace bgh;
using bgh::testing::fixed;
using bgh::testing::Rng;

namespace {

using u128 = unsigned __int128;

// q=1 model with its single interior breakpoint near 0.3, divisible by 16 so
// that halves of it are valid 60-bit hash values.
constexpr std::uint64_t kS = 2767011611056432640ull;

BalancedModel three_tenths() { return BalancedModel::from_breakpoints(1, {0, kS, kFixedOne}, 3, 3); }

std::vector<WeightedHash> random_hashes(Rng& rng, std::size_t n, bool duplicates) {
  std::vector<WeightedHash> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t v = rng.next() >> 1;
    if (duplicates) v = (rng.below(8) + 1) << 59;
    out.push_back({v & ~std::uint64_t{7}, rng.below(5)});
  }
  out.push_back({rng.next() >> 4 << 3, 1});
  return out;
}

}  // namespace

TEST_CASE("fit: three unit-weight values at q=1") {
  const auto m = fit_hashes({{fixed(0.2), 1}, {fixed(0.5), 1}, {fixed(0.8), 1}}, 1);
  REQUIRE(m.breakpoints().size() == 3);
  CHECK(m.breakpoints()[0] == 0);
  CHECK(m.breakpoints()[2] == kFixedOne);
  // G^-1(1/2) = 0.5, scaled by 3/5
  CHECK(m.breakpoints()[1] == static_cast<std::uint64_t>(static_cast<u128>(fixed(0.5)) * 3 / 5));
  CHECK(std::ldexp(static_cast<double>(m.breakpoints()[1]), -63) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(m.n_points() == 3);
  CHECK(m.total_weight() == 3);
}

TEST_CASE("fit: all points identical") {
  const GeoPoint p{12.5, -40.25};
  std::vector<WeightedPoint> pts(50, WeightedPoint{p, 1});
  const auto m = fit(pts, 2);
  const std::uint64_t g = standard_value(p);
  const std::uint64_t third = static_cast<std::uint64_t>(static_cast<u128>(g) / 3);
  CHECK(m.breakpoints()[1] == third);
  CHECK(m.breakpoints()[2] == third);
  CHECK(m.breakpoints()[3] == third);
  CHECK(m.n_points() == 1);
  // Encoding the lone value skips the zero-width buckets 1 and 2.
  CHECK(balanced_encode(m, p, 2).code == 3);
  CHECK(balanced_decode(m, HashCode{1, 2}).empty());
  CHECK(balanced_decode(m, HashCode{2, 2}).empty());
  CHECK(balanced_decode(m, HashCode{3, 2}).contains(g));
}

TEST_CASE("fit matches the brute-force weighted quantile") {
  Rng rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const bool dup = trial % 2 == 0;
    auto samples = random_hashes(rng, 5 + rng.below(40), dup);
    const int q = 1 + static_cast<int>(rng.below(4));
    const auto m = fit_hashes(samples, q);
    std::size_t distinct = 0;
    {
      std::vector<std::uint64_t> vals;
      for (const auto& s : samples) if (s.weight > 0) vals.push_back(s.value);
      std::sort(vals.begin(), vals.end());
      distinct = static_cast<std::size_t>(std::unique(vals.begin(), vals.end()) - vals.begin());
    }
    REQUIRE(m.n_points() == distinct);
    const std::size_t count = std::size_t{1} << q;
    for (std::size_t i = 1; i < count; ++i) {
      const auto qv = bgh::testing::brute_quantile(samples, static_cast<long double>(i) / count);
      const auto expect = static_cast<std::uint64_t>(static_cast<u128>(qv) * distinct / (distinct + 2));
      CHECK(m.breakpoints()[i] == expect);
    }
  }
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit_hashes({}, 3), FitError);
  CHECK_THROWS_AS(fit_hashes({{fixed(0.5), 0}}, 3), FitError);
  CHECK_THROWS_AS(fit_hashes({{fixed(0.5), 1}}, 0), ArgumentError);
  CHECK_THROWS_AS(fit_hashes({{fixed(0.5), 1}}, 25), ArgumentError);
}

TEST_CASE("fit on uniform data recovers uniform quantiles") {
  Rng rng(3);
  std::vector<WeightedPoint> pts;
  for (int i = 0; i < 100000; ++i) pts.push_back({rng.point(), 1});
  const auto m = fit(pts, 4);
  for (std::size_t i = 0; i <= 16; ++i) {
    CHECK(std::abs(std::ldexp(static_cast<double>(m.breakpoints()[i]), -63) - i / 16.0) < 0.005);
  }
}

TEST_CASE("fit on an exact grid recovers scaled uniform quantiles") {
  // 64 x 64 grid of cell corners: 4096 distinct equally spaced 12-bit hashes.
  std::vector<WeightedPoint> pts;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) pts.push_back({{-90.0 + 180.0 * j / 64, -180.0 + 360.0 * i / 64}, 1});
  }
  const auto m = fit(pts, 4);
  const std::uint64_t n = 4096;
  for (std::size_t i = 1; i < 16; ++i) {
    // ceil(i/16 * 4096)-th smallest of k/4096 is (256 i - 1)/4096
    const std::uint64_t quantile = (256 * i - 1) << (63 - 12);
    const auto expect = static_cast<std::uint64_t>(static_cast<u128>(quantile) * n / (n + 2));
    const auto got = m.breakpoints()[i];
    CHECK((got > expect ? got - expect : expect - got) <= 1);
  }
}

TEST_CASE("balanced_encode on the identity model is the standard hash") {
  const auto id = BalancedModel::identity(6);
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint p = rng.point();
    const int m = 1 + static_cast<int>(rng.below(60));
    CHECK(balanced_encode(id, p, m) == encode(p, m));
  }
}

TEST_CASE("balanced_encode interpolates within a bucket") {
  const auto m = three_tenths();
  CHECK(balanced_encode_value(m, kS / 2, 3).bit_string() == "010");
  CHECK(balanced_encode_value(m, kS, 3).bit_string() == "100");
  CHECK(balanced_encode_value(m, 0, 3).bit_string() == "000");
}

TEST_CASE("balanced_decode returns the exact preimage") {
  const auto id = BalancedModel::identity(3);
  const auto iv = balanced_decode(id, parse_bit_string("01"));
  CHECK(iv.lo_value() == 0.25);
  CHECK(iv.hi_value() == 0.5);

  const auto m = three_tenths();
  CHECK(balanced_decode(m, parse_bit_string("0")) == HashInterval{0, kS});
  CHECK(balanced_decode(m, parse_bit_string("1")) == HashInterval{kS, kFixedOne});
}

TEST_CASE("lower_preimage is the least value reaching its argument") {
  Rng rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = fit_hashes(random_hashes(rng, 30, trial % 3 == 0), 1 + static_cast<int>(rng.below(5)));
    for (int i = 0; i < 200; ++i) {
      const std::uint64_t y = rng.next() >> 1;
      const std::uint64_t a = m.lower_preimage(y);
      if (a < kFixedOne) CHECK(m.forward(a) >= y);
      if (a > 0) CHECK(m.forward(a - 1) < y);
    }
  }
}

TEST_CASE("forward map is monotone and decode contains encode") {
  Rng rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<WeightedPoint> pts;
    const GeoPoint hub = rng.point();
    for (int i = 0; i < 300; ++i) {
      const GeoPoint p = i % 3 == 0 ? hub : rng.point();
      pts.push_back({p, 1 + rng.below(3)});
    }
    const auto m = fit(pts, 1 + static_cast<int>(rng.below(8)));
    CHECK(m.forward(0) == 0);
    for (int i = 0; i < 300; ++i) {
      const GeoPoint p = i % 5 == 0 ? hub : rng.point();
      const std::uint64_t g = standard_value(p);
      const std::uint64_t g2 = g + (rng.next() >> 30);
      if (g2 < kFixedOne) CHECK(m.forward(g) <= m.forward(g2));
      const int bits = 1 + static_cast<int>(rng.below(60));
      CHECK(balanced_decode(m, balanced_encode(m, p, bits)).contains(g));
    }
  }
}

TEST_CASE("fresh samples spread evenly over fitted buckets") {
  Rng rng(53);
  auto draw = [&] {
    // Two broad regions on a sparse background. The density stays moderate:
    // the N/(N+2) shrink moves each breakpoint by about 2/N of its value,
    // which for a sharply concentrated sample shifts visible mass.
    const double u = rng.uniform();
    if (u < 0.45) return GeoPoint{40.0 + rng.uniform(-15, 15), -83.0 + rng.uniform(-20, 20)};
    if (u < 0.9) return GeoPoint{-33.0 + rng.uniform(-10, 10), 140.0 + rng.uniform(-15, 15)};
    return rng.point();
  };
  std::vector<WeightedPoint> train;
  for (int i = 0; i < 1000000; ++i) train.push_back({draw(), 1});
  const int q = 4;
  const auto m = fit(train, q);
  const int n_eval = 20000;
  std::vector<int> counts(16, 0);
  for (int i = 0; i < n_eval; ++i) ++counts[balanced_encode(m, draw(), q).code];
  const double tol = 3 * std::sqrt(std::ldexp(1.0, -q) / n_eval);
  for (int c : counts) CHECK(std::abs(static_cast<double>(c) / n_eval - 1.0 / 16) <= tol);
}

TEST_CASE("model invariants are enforced") {
  CHECK_THROWS_AS(BalancedModel::from_breakpoints(1, {1, kS, kFixedOne}, 3, 3), ArgumentError);
  CHECK_THROWS_AS(BalancedModel::from_breakpoints(1, {0, kS, kFixedOne - 1}, 3, 3), ArgumentError);
  CHECK_THROWS_AS(BalancedModel::from_breakpoints(2, {0, kS, kS - 1, kS, kFixedOne}, 3, 3), ArgumentError);
  // 0.9 exceeds N/(N+2) = 3/5
  CHECK_THROWS_AS(BalancedModel::from_breakpoints(1, {0, fixed(0.875), kFixedOne}, 3, 3), ArgumentError);
  CHECK_THROWS_AS(BalancedModel::from_breakpoints(1, {0, kFixedOne}, 3, 3), ArgumentError);
}

TEST_CASE("dyadic cover rounds outward at the cap") {
  const auto cells = dyadic_cover({0, fixed(0.3)}, 4);
  REQUIRE(cells.size() == 2);
  CHECK(HashCode{cells[0].prefix, cells[0].depth}.bit_string() == "00");
  CHECK(HashCode{cells[1].prefix, cells[1].depth}.bit_string() == "0100");

  const auto world = dyadic_cover({0, kFixedOne}, 10);
  REQUIRE(world.size() == 1);
  CHECK(world[0].depth == 0);
  CHECK(world[0].rect == CellRect{});
  CHECK(dyadic_cover({5, 5}, 10).empty());
  CHECK_THROWS_AS(dyadic_cover({0, 1}, 61), ArgumentError);
}

TEST_CASE("bucket regions of the identity model are quadrants") {
  const auto regions = bucket_regions(BalancedModel::identity(4), 2, 8);
  REQUIRE(regions.size() == 4);
  for (const auto& r : regions) REQUIRE(r.cells.size() == 1);
  CHECK(regions[0].cells[0].rect == CellRect{-90.0, 0.0, -180.0, 0.0});
  CHECK(regions[3].cells[0].rect == CellRect{0.0, 90.0, 0.0, 180.0});
  CHECK_THROWS_AS(bucket_regions(BalancedModel::identity(4), 2, 61), ArgumentError);
}

TEST_CASE("bucket regions cover each bucket's true region") {
  Rng rng(59);
  std::vector<WeightedPoint> pts;
  for (int i = 0; i < 5000; ++i) pts.push_back({{rng.uniform(30, 50), rng.uniform(-100, -70)}, 1});
  const auto m = fit(pts, 5);
  const auto regions = bucket_regions(m, 3, 12);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint p = i % 2 ? pts[static_cast<std::size_t>(i)].point : rng.point();
    const auto code = balanced_encode(m, p, 3).code;
    bool inside = false;
    for (const auto& c : regions[code].cells) inside = inside || c.rect.contains(p);
    CHECK(inside);
  }
}

TEST_CASE("serialization round trip, size, and corruption") {
  Rng rng(61);
  std::vector<WeightedPoint> pts;
  for (int i = 0; i < 3000; ++i) pts.push_back({rng.point(), 1 + rng.below(9)});
  const auto m = fit(pts, 8);
  const auto bytes = serialize(m);
  CHECK(bytes.size() == 2084);
  CHECK(deserialize(bytes) == m);

  auto bad = bytes;
  bad[100] ^= 0x01;
  CHECK_THROWS_WITH_AS(deserialize(bad), doctest::Contains("checksum"), LoadError);
  bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_WITH_AS(deserialize(bad), doctest::Contains("magic"), LoadError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_WITH_AS(deserialize(bad), doctest::Contains("version"), LoadError);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(deserialize(bad), LoadError);

  const auto path = std::filesystem::temp_directory_path() / "bgh_unit_model.bgh";
  save(m, path);
  CHECK(std::filesystem::file_size(path) == 2084);
  CHECK(load(path) == m);
  std::filesystem::remove(path);
  CHECK_THROWS_WITH_AS(load(path), doctest::Contains("bgh_unit_model.bgh"), IoError);
}
