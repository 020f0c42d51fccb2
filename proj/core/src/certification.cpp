#include "locodl/certification.hpp"

#include <cmath>

#include "locodl/error.hpp"

namespace locodl {

CertificationReport certify_compressor(const CompressorSpec& spec, const Vector& probe, std::size_t trials,
                                       RandomStream& rng, std::optional<double> declared_omega) {
  if (trials < 2) throw InputError("certify: need at least 2 trials");
  const double norm2 = probe.squaredNorm();
  if (norm2 == 0.0) throw InputError("certify: probe vector must be nonzero");

  const auto d = probe.size();
  // Deviations from the probe, so an exact compressor accumulates exact zeros.
  Vector sum = Vector::Zero(d);
  Vector sum_sq = Vector::Zero(d);
  Vector dev(d);
  double err_sum = 0.0;
  Vector out;
  for (std::size_t t = 0; t < trials; ++t) {
    compress_into(spec, probe, rng, out);
    dev = out - probe;
    sum += dev;
    sum_sq += dev.cwiseProduct(dev);
    err_sum += dev.squaredNorm();
  }

  CertificationReport report;
  report.trials = trials;
  report.declared_omega = declared_omega.value_or(omega(spec));
  const auto count = static_cast<double>(trials);
  report.unbiased = true;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = sum[j] / count;
    const double var = std::max(0.0, (sum_sq[j] - count * mean * mean) / (count - 1.0));
    const double se = std::sqrt(var / count);
    const double bias = std::abs(mean);
    if (se == 0.0) {
      if (bias > 0.0) report.unbiased = false;
      continue;
    }
    report.max_standard_errors = std::max(report.max_standard_errors, bias / se);
  }
  if (report.max_standard_errors > kUnbiasedStandardErrors) report.unbiased = false;
  report.variance_ratio = err_sum / count / norm2;
  report.variance_limit = report.declared_omega * 1.05 + 5.0 / std::sqrt(count);
  report.variance_ok = report.variance_ratio <= report.variance_limit;
  return report;
}

}  // namespace locodl
