#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "locodl/objectives.hpp"

namespace locodl {

/// One sample: sparse features (0-based, strictly increasing indices) and a +-1 label.
struct SparseRow {
  std::vector<std::size_t> indices;
  std::vector<double> values;
  double label = 1.0;

  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

/// Binary-classification dataset; dim is the largest feature index seen (1-based in the source).
struct Dataset {
  std::vector<SparseRow> rows;
  std::size_t dim = 0;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Reads LibSVM text: "label idx:val idx:val ...", indices >= 1 and strictly
/// increasing, '#' starts a comment, blank lines are skipped. Labels must form a
/// subset of {-1, +1} or of {0, 1}; 0 is mapped to -1. Throws ParseError.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm_string(const std::string& text);
Dataset load_libsvm(const std::string& path);

/// Writes rows back in LibSVM form; parse_libsvm(to_libsvm(ds)) == ds.
std::string to_libsvm(const Dataset& dataset);

/// Dense shard with the given rows in the given order.
Shard to_shard(const Dataset& dataset, std::span<const std::size_t> row_ids);

/// Row permutation used by partition (seeded Fisher-Yates).
std::vector<std::size_t> shuffled_order(std::size_t rows, std::uint64_t seed);

/// Shuffles rows, gives each of the n clients m = floor(rows/n) consecutive
/// rows of the shuffled order and discards the remainder.
std::vector<Shard> partition(const Dataset& dataset, std::size_t n, std::uint64_t seed);

/// n samples, each drawn from Dirichlet(alpha 1_d) via normalized Gamma(alpha, 1)
/// draws, labelled by a seeded fair coin; one sample per client.
Dataset dirichlet_synthetic(std::size_t n, std::size_t dim, double alpha, std::uint64_t seed);

/// Gaussian features with labels drawn from a planted logistic model:
/// a ~ N(0, I_d), Prob(b = +1) = sigmoid(a^T w) with w ~ N(0, I_d / d).
Dataset gaussian_logistic_synthetic(std::size_t rows, std::size_t dim, std::uint64_t seed);

}  // namespace locodl
