#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "locodl/objectives.hpp"
#include "locodl/random.hpp"

namespace locodl {

enum class CompressorKind {
  identity,
  rand_k,
  natural,
  rand_k_natural,
  l1_selection,
};

std::string_view to_string(CompressorKind kind) noexcept;
/// Accepts the names printed by to_string plus "rand-k", "randk", "natural_compression" style aliases.
CompressorKind parse_compressor_kind(std::string_view name);

/// An unbiased compressor C in U(omega) acting on R^d.
struct CompressorSpec {
  CompressorKind kind = CompressorKind::identity;
  std::size_t dim = 0;
  std::size_t k = 0;  // used by rand_k and rand_k_natural only

  static CompressorSpec identity(std::size_t dim) { return {CompressorKind::identity, dim, 0}; }
  static CompressorSpec rand_k(std::size_t dim, std::size_t k) { return {CompressorKind::rand_k, dim, k}; }
  static CompressorSpec natural(std::size_t dim) { return {CompressorKind::natural, dim, 0}; }
  static CompressorSpec rand_k_natural(std::size_t dim, std::size_t k) {
    return {CompressorKind::rand_k_natural, dim, k};
  }
  static CompressorSpec l1_selection(std::size_t dim) { return {CompressorKind::l1_selection, dim, 0}; }

  /// Throws InputError when d == 0 or k is outside [1, d] for the sparsifiers.
  void validate() const;
  /// Short label such as "rand_k2" or "natural".
  std::string label() const;
};

/// Decompressed value C(x) and its metered size on the wire.
struct CompressedMessage {
  Vector payload;
  std::uint64_t bits = 0;
  /// Natural compression hit the edge of the 8-bit exponent range.
  bool saturated = false;
};

/// ceil(log2(d)), with ceil_log2(1) == 0.
std::uint64_t ceil_log2(std::uint64_t d) noexcept;

/// identity: 32d; rand_k: 32k + k ceil(log2 d); natural: 9d;
/// rand_k_natural: 9k + k ceil(log2 d); l1_selection: 32 + ceil(log2 d).
std::uint64_t bit_cost(const CompressorSpec& spec);

/// identity: 0; rand_k: d/k - 1; natural: 1/8; rand_k_natural: 9d/(8k) - 1; l1_selection: d - 1.
double omega(const CompressorSpec& spec);
/// omega / n for n independent compressors.
double omega_av(const CompressorSpec& spec, std::size_t n);

/// Smallest and largest binary exponents natural compression can emit (sign + 8-bit exponent).
inline constexpr int kNaturalMinExponent = -126;
inline constexpr int kNaturalMaxExponent = 127;

/// Unbiased randomized rounding of t to one of the two neighbouring signed powers of two.
/// Sets saturated when t lies outside the representable exponent range.
double natural_round(double t, RandomStream& rng, bool& saturated);

/// Draws C(x). Throws InputError for a dimension mismatch or non-finite input.
CompressedMessage compress(const CompressorSpec& spec, const Vector& x, RandomStream& rng);

/// Allocation-free variant used inside the step loops; returns the saturation flag.
bool compress_into(const CompressorSpec& spec, const Vector& x, RandomStream& rng, Vector& out);

/// (1/trials) sum_t ||C_t(x) - x||^2 / ||x||^2.
double empirical_variance_ratio(const CompressorSpec& spec, const Vector& x, std::size_t trials,
                                RandomStream& rng);

}  // namespace locodl
