#include "locodl/compressors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "locodl/error.hpp"

namespace locodl {

namespace {

void require_sparsifier_k(const CompressorSpec& spec) {
  if (spec.k < 1 || spec.k > spec.dim) {
    throw InputError("compressor " + std::string(to_string(spec.kind)) + ": k must lie in [1, d], got k=" +
                     std::to_string(spec.k) + ", d=" + std::to_string(spec.dim));
  }
}

// Floyd's algorithm: k distinct indices from [0, d), O(k) draws.
void sample_subset(std::size_t d, std::size_t k, RandomStream& rng, std::vector<std::size_t>& chosen) {
  chosen.clear();
  for (std::size_t j = d - k; j < d; ++j) {
    const auto t = static_cast<std::size_t>(rng.below(j + 1));
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
}

}  // namespace

std::string_view to_string(CompressorKind kind) noexcept {
  switch (kind) {
    case CompressorKind::identity: return "identity";
    case CompressorKind::rand_k: return "rand_k";
    case CompressorKind::natural: return "natural";
    case CompressorKind::rand_k_natural: return "rand_k_natural";
    case CompressorKind::l1_selection: return "l1_selection";
  }
  return "unknown";
}

CompressorKind parse_compressor_kind(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (key == "identity" || key == "none") return CompressorKind::identity;
  if (key == "rand_k" || key == "randk") return CompressorKind::rand_k;
  if (key == "natural" || key == "natural_compression") return CompressorKind::natural;
  if (key == "rand_k_natural" || key == "randk_natural") return CompressorKind::rand_k_natural;
  if (key == "l1_selection" || key == "l1") return CompressorKind::l1_selection;
  throw InputError("unknown compressor '" + std::string(name) + "'");
}

void CompressorSpec::validate() const {
  if (dim == 0) throw InputError("compressor: dimension must be positive");
  if (kind == CompressorKind::rand_k || kind == CompressorKind::rand_k_natural) require_sparsifier_k(*this);
}

std::string CompressorSpec::label() const {
  switch (kind) {
    case CompressorKind::rand_k: return "rand_k" + std::to_string(k);
    case CompressorKind::rand_k_natural: return "rand_k" + std::to_string(k) + "_natural";
    default: return std::string(to_string(kind));
  }
}

std::uint64_t ceil_log2(std::uint64_t d) noexcept {
  std::uint64_t bits = 0;
  while ((std::uint64_t{1} << bits) < d) ++bits;
  return bits;
}

std::uint64_t bit_cost(const CompressorSpec& spec) {
  spec.validate();
  const std::uint64_t d = spec.dim;
  const std::uint64_t k = spec.k;
  switch (spec.kind) {
    case CompressorKind::identity: return 32 * d;
    case CompressorKind::rand_k: return 32 * k + k * ceil_log2(d);
    case CompressorKind::natural: return 9 * d;
    case CompressorKind::rand_k_natural: return 9 * k + k * ceil_log2(d);
    case CompressorKind::l1_selection: return 32 + ceil_log2(d);
  }
  return 0;
}

double omega(const CompressorSpec& spec) {
  spec.validate();
  const auto d = static_cast<double>(spec.dim);
  const auto k = static_cast<double>(spec.k);
  switch (spec.kind) {
    case CompressorKind::identity: return 0.0;
    case CompressorKind::rand_k: return d / k - 1.0;
    case CompressorKind::natural: return 1.0 / 8.0;
    case CompressorKind::rand_k_natural: return 9.0 * d / (8.0 * k) - 1.0;
    case CompressorKind::l1_selection: return d - 1.0;
  }
  return 0.0;
}

double omega_av(const CompressorSpec& spec, std::size_t n) {
  if (n < 1) throw InputError("omega_av: n must be at least 1");
  return omega(spec) / static_cast<double>(n);
}

double natural_round(double t, RandomStream& rng, bool& saturated) {
  if (t == 0.0) return 0.0;
  const double magnitude = std::abs(t);
  int exponent = 0;
  std::frexp(magnitude, &exponent);  // magnitude in [2^(exponent-1), 2^exponent)
  const int low_exp = exponent - 1;
  double result;
  if (low_exp < kNaturalMinExponent) {
    saturated = true;
    result = std::ldexp(1.0, kNaturalMinExponent);
  } else if (low_exp >= kNaturalMaxExponent) {
    saturated = saturated || magnitude > std::ldexp(1.0, kNaturalMaxExponent);
    result = std::ldexp(1.0, kNaturalMaxExponent);
  } else {
    const double low = std::ldexp(1.0, low_exp);
    if (magnitude == low) {
      result = low;
    } else {
      // Prob(low) = (2 low - |t|) / low keeps the expectation at |t|.
      const double p_low = (2.0 * low - magnitude) / low;
      result = rng.uniform() < p_low ? low : 2.0 * low;
    }
  }
  return std::copysign(result, t);
}

bool compress_into(const CompressorSpec& spec, const Vector& x, RandomStream& rng, Vector& out) {
  spec.validate();
  const auto d = static_cast<Eigen::Index>(spec.dim);
  if (x.size() != d) {
    throw InputError("compress: vector has dimension " + std::to_string(x.size()) + ", compressor expects " +
                     std::to_string(spec.dim));
  }
  if (!x.allFinite()) throw InputError("compress: non-finite input coordinate");
  out.resize(d);
  bool saturated = false;

  switch (spec.kind) {
    case CompressorKind::identity:
      out = x;
      break;
    case CompressorKind::natural:
      for (Eigen::Index j = 0; j < d; ++j) out[j] = natural_round(x[j], rng, saturated);
      break;
    case CompressorKind::rand_k:
    case CompressorKind::rand_k_natural: {
      thread_local std::vector<std::size_t> chosen;
      sample_subset(spec.dim, spec.k, rng, chosen);
      const double scale = static_cast<double>(spec.dim) / static_cast<double>(spec.k);
      out.setZero();
      for (std::size_t j : chosen) {
        const double v = scale * x[static_cast<Eigen::Index>(j)];
        out[static_cast<Eigen::Index>(j)] =
            spec.kind == CompressorKind::rand_k ? v : natural_round(v, rng, saturated);
      }
      break;
    }
    case CompressorKind::l1_selection: {
      out.setZero();
      const double l1 = x.lpNorm<1>();
      if (l1 == 0.0) break;
      // Inverse CDF over |x_j| / ||x||_1; zero coordinates are never selected.
      const double target = rng.uniform() * l1;
      double cumulative = 0.0;
      Eigen::Index pick = -1;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (x[j] == 0.0) continue;
        pick = j;
        cumulative += std::abs(x[j]);
        if (target < cumulative) break;
      }
      out[pick] = std::copysign(l1, x[pick]);
      break;
    }
  }
  return saturated;
}

CompressedMessage compress(const CompressorSpec& spec, const Vector& x, RandomStream& rng) {
  CompressedMessage msg;
  msg.saturated = compress_into(spec, x, rng, msg.payload);
  msg.bits = bit_cost(spec);
  return msg;
}

double empirical_variance_ratio(const CompressorSpec& spec, const Vector& x, std::size_t trials,
                                RandomStream& rng) {
  if (trials < 1) throw InputError("empirical_variance_ratio: trials must be at least 1");
  const double norm2 = x.squaredNorm();
  if (norm2 == 0.0) throw InputError("empirical_variance_ratio: ratio undefined for x = 0");
  Vector out;
  double sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    compress_into(spec, x, rng, out);
    sum += (out - x).squaredNorm();
  }
  return sum / static_cast<double>(trials) / norm2;
}

}  // namespace locodl
