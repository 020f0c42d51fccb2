#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "locodl/compressors.hpp"

namespace locodl {

/// Empirical check of E[C(x)] = x and E||C(x) - x||^2 <= omega ||x||^2 on one probe vector.
struct CertificationReport {
  std::size_t trials = 0;
  double declared_omega = 0.0;
  /// max_j |mean_j - x_j| / SE_j (coordinates with zero spread must match exactly).
  double max_standard_errors = 0.0;
  double variance_ratio = 0.0;
  /// declared_omega * 1.05 + 5 / sqrt(trials)
  double variance_limit = 0.0;
  bool unbiased = false;
  bool variance_ok = false;

  bool passed() const noexcept { return unbiased && variance_ok; }
};

/// Unbiasedness tolerance in standard errors per coordinate.
inline constexpr double kUnbiasedStandardErrors = 4.0;

/// Compresses the probe `trials` times. declared_omega defaults to omega(spec);
/// passing a different value is how a mis-declared compressor is exercised.
CertificationReport certify_compressor(const CompressorSpec& spec, const Vector& probe, std::size_t trials,
                                       RandomStream& rng, std::optional<double> declared_omega = std::nullopt);

}  // namespace locodl
