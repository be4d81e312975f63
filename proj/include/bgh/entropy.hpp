// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bgh/balanced_model.hpp"

namespace bgh {

/// Shannon entropy in bits of a histogram, summed in index order.
/// Empty buckets contribute nothing. Throws ArgumentError on a zero total.
double entropy(std::span<const std::uint64_t> counts);

struct EntropyRow {
  std::string scheme;
  int bits = 0;
  double entropy = 0.0;
  double entropy_per_bit = 0.0;
};

struct EntropyReport {
  std::vector<EntropyRow> rows;

  /// Header `scheme,bits,entropy,entropy_per_bit`, 12 significant digits.
  std::string to_csv() const;
};

/// Occupied `bits`-bit prefixes with their total weight, in prefix order.
/// `model == nullptr` buckets by the standard hash.
std::vector<std::pair<std::uint64_t, std::uint64_t>> prefix_histogram(
    std::span<const WeightedPoint> points, const BalancedModel* model, int bits);

/// Entropy and entropy-per-bit of the m-bit hash for each m in `precisions`.
/// The scheme is the standard hash when `model` is null, otherwise the
/// balanced hash of `model`. Rows follow the order of `precisions`.
EntropyReport entropy_curve(std::span<const WeightedPoint> points, const BalancedModel* model,
                            std::span<const int> precisions);

/// Lower bound on the entropy of a q-bit balanced hash fitted to n unique
/// samples and the probability with which it holds:
///   threshold   = q * n/(n+2) * a
///   probability = 1 - 2 exp(-0.49 * 2^(-2q) * n * (1-a)^2)
struct BoundResult {
  double threshold = 0.0;
  double probability_lower_bound = 0.0;
};
BoundResult theorem_bound(int q, double n, double a);

}  // namespace bgh
