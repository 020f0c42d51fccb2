#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "locodl/certification.hpp"
#include "locodl/compressors.hpp"
#include "locodl/error.hpp"

using namespace locodl;

namespace locodl {
void PrintTo(const CompressorSpec& spec, std::ostream* os) { *os << spec.label(); }
}  // namespace locodl

namespace {

bool is_signed_power_of_two_or_zero(double v) {
  if (v == 0.0) return true;
  int e = 0;
  return std::abs(std::frexp(v, &e)) == 0.5;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST(RandK, PayloadsEnumerateAllSubsets) {
  const CompressorSpec spec = CompressorSpec::rand_k(4, 2);
  const Vector x{{1.0, 2.0, 3.0, 4.0}};
  RandomStream rng(1);
  std::map<std::vector<double>, int> counts;
  const int trials = 60'000;
  for (int t = 0; t < trials; ++t) ++counts[to_std(compress(spec, x, rng).payload)];
  ASSERT_EQ(counts.size(), 6u);
  // S = {1, 3} (1-based) keeps x_1, x_3 scaled by d/k = 2
  ASSERT_TRUE(counts.count({2.0, 0.0, 6.0, 0.0}));
  Vector mean_over_subsets = Vector::Zero(4);
  for (const auto& [payload, count] : counts) {
    EXPECT_NEAR(count / double(trials), 1.0 / 6.0, 0.01);
    mean_over_subsets += Eigen::Map<const Vector>(payload.data(), 4) / 6.0;
  }
  EXPECT_NEAR((mean_over_subsets - x).norm(), 0.0, 1e-12);
}

TEST(Natural, RoundsBetweenNeighbouringPowers) {
  RandomStream rng(2);
  bool saturated = false;
  int fours = 0;
  const int trials = 100'000;
  for (int t = 0; t < trials; ++t) {
    const double r = natural_round(5.0, rng, saturated);
    ASSERT_TRUE(r == 4.0 || r == 8.0);
    fours += r == 4.0;
  }
  const double se = std::sqrt(0.75 * 0.25 / trials);
  EXPECT_NEAR(fours / double(trials), 0.75, 4 * se);
  for (int t = 0; t < 100; ++t) {
    EXPECT_EQ(natural_round(4.0, rng, saturated), 4.0);
    EXPECT_EQ(natural_round(-0.25, rng, saturated), -0.25);
    EXPECT_EQ(natural_round(0.0, rng, saturated), 0.0);
  }
  EXPECT_FALSE(saturated);
  const double neg = natural_round(-5.0, rng, saturated);
  EXPECT_TRUE(neg == -4.0 || neg == -8.0);
}

TEST(Natural, FlagsOutOfRangeValues) {
  RandomStream rng(3);
  bool saturated = false;
  const double big = natural_round(std::ldexp(1.5, 200), rng, saturated);
  EXPECT_TRUE(saturated);
  EXPECT_TRUE(std::isfinite(big));
  saturated = false;
  natural_round(std::ldexp(1.5, -140), rng, saturated);
  EXPECT_TRUE(saturated);
}

TEST(L1Selection, TwoOutcomes) {
  const CompressorSpec spec = CompressorSpec::l1_selection(2);
  const Vector x{{3.0, -1.0}};
  RandomStream rng(4);
  int first = 0;
  const int trials = 100'000;
  for (int t = 0; t < trials; ++t) {
    const Vector p = compress(spec, x, rng).payload;
    if (p[0] == 4.0 && p[1] == 0.0) {
      ++first;
    } else {
      ASSERT_EQ(p[0], 0.0);
      ASSERT_EQ(p[1], -4.0);
    }
  }
  EXPECT_NEAR(first / double(trials), 0.75, 4 * std::sqrt(0.75 * 0.25 / trials));
}

TEST(Identity, ReturnsInput) {
  const Vector x{{1.5, -2.0, 0.0}};
  RandomStream rng(5);
  const CompressedMessage m = compress(CompressorSpec::identity(3), x, rng);
  EXPECT_EQ(m.payload, x);
  EXPECT_EQ(m.bits, 96u);
}

TEST(BitCost, ClosedForms) {
  EXPECT_EQ(ceil_log2(1), 0u);
  EXPECT_EQ(ceil_log2(122), 7u);
  EXPECT_EQ(ceil_log2(128), 7u);
  EXPECT_EQ(ceil_log2(129), 8u);
  EXPECT_EQ(bit_cost(CompressorSpec::rand_k(122, 2)), 78u);
  EXPECT_EQ(bit_cost(CompressorSpec::l1_selection(122)), 39u);
  EXPECT_EQ(bit_cost(CompressorSpec::natural(8)), 72u);
  EXPECT_EQ(bit_cost(CompressorSpec::identity(10)), 320u);
  EXPECT_EQ(bit_cost(CompressorSpec::rand_k_natural(122, 2)), 32u);
}

TEST(Omega, ClosedForms) {
  EXPECT_DOUBLE_EQ(omega(CompressorSpec::rand_k(122, 2)), 60.0);
  EXPECT_DOUBLE_EQ(omega(CompressorSpec::natural(5)), 0.125);
  EXPECT_DOUBLE_EQ(omega(CompressorSpec::identity(5)), 0.0);
  EXPECT_DOUBLE_EQ(omega_av(CompressorSpec::identity(5), 17), 0.0);
  EXPECT_DOUBLE_EQ(omega(CompressorSpec::rand_k_natural(16, 2)), 9.0 * 16 / 16 - 1.0);
  EXPECT_DOUBLE_EQ(omega(CompressorSpec::l1_selection(16)), 15.0);
  EXPECT_DOUBLE_EQ(omega_av(CompressorSpec::rand_k(122, 2), 87), 60.0 / 87.0);
}

TEST(EmpiricalVariance, KnownRatios) {
  RandomStream rng(6);
  EXPECT_EQ(empirical_variance_ratio(CompressorSpec::identity(4), Vector::Ones(4), 100, rng), 0.0);
  EXPECT_NEAR(empirical_variance_ratio(CompressorSpec::rand_k(10, 1), Vector::Ones(10), 100'000, rng), 9.0, 0.2);
  EXPECT_EQ(empirical_variance_ratio(CompressorSpec::l1_selection(6), Vector::Unit(6, 0), 1000, rng), 0.0);
}

class CompressorProperties : public ::testing::TestWithParam<CompressorSpec> {};

TEST_P(CompressorProperties, UnbiasedWithinDeclaredVariance) {
  const CompressorSpec spec = GetParam();
  RandomStream probe_rng(7);
  Vector x(spec.dim);
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = probe_rng.normal();
  RandomStream rng(8);
  const CertificationReport r = certify_compressor(spec, x, 50'000, rng);
  EXPECT_TRUE(r.unbiased) << spec.label() << " max SE " << r.max_standard_errors;
  EXPECT_TRUE(r.variance_ok) << spec.label() << " ratio " << r.variance_ratio << " limit " << r.variance_limit;
}

TEST_P(CompressorProperties, PayloadIsRepresentable) {
  const CompressorSpec spec = GetParam();
  RandomStream rng(9);
  Vector x(spec.dim);
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = 3.0 * rng.normal();
  for (int t = 0; t < 200; ++t) {
    const CompressedMessage m = compress(spec, x, rng);
    EXPECT_EQ(m.bits, bit_cost(spec));
    const auto nonzeros = (m.payload.array() != 0.0).count();
    switch (spec.kind) {
      case CompressorKind::rand_k:
        EXPECT_LE(nonzeros, static_cast<Eigen::Index>(spec.k));
        break;
      case CompressorKind::rand_k_natural:
        EXPECT_LE(nonzeros, static_cast<Eigen::Index>(spec.k));
        for (double v : to_std(m.payload)) EXPECT_TRUE(is_signed_power_of_two_or_zero(v));
        break;
      case CompressorKind::natural:
        for (double v : to_std(m.payload)) EXPECT_TRUE(is_signed_power_of_two_or_zero(v));
        break;
      case CompressorKind::l1_selection:
        EXPECT_EQ(nonzeros, 1);
        break;
      case CompressorKind::identity:
        EXPECT_EQ(m.payload, x);
        break;
    }
  }
}

TEST_P(CompressorProperties, ZeroMapsToZero) {
  RandomStream rng(10);
  const CompressorSpec spec = GetParam();
  EXPECT_EQ(compress(spec, Vector::Zero(spec.dim), rng).payload.norm(), 0.0);
}

TEST_P(CompressorProperties, DeterministicPerSeed) {
  const CompressorSpec spec = GetParam();
  const Vector x = Vector::LinSpaced(spec.dim, -1.0, 2.0);
  RandomStream a(11), b(11);
  for (int t = 0; t < 50; ++t) EXPECT_EQ(compress(spec, x, a).payload, compress(spec, x, b).payload);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, CompressorProperties,
                         ::testing::Values(CompressorSpec::identity(16), CompressorSpec::rand_k(16, 1),
                                           CompressorSpec::rand_k(16, 2), CompressorSpec::rand_k(16, 8),
                                           CompressorSpec::natural(16), CompressorSpec::rand_k_natural(16, 2),
                                           CompressorSpec::l1_selection(16)),
                         [](const auto& info) { return info.param.label(); });

TEST(JointVariance, IndependentClientsAverageOut) {
  // E||(1/n) sum (C_i(x_i) - x_i)||^2 <= (omega / n) (1/n) sum ||x_i||^2
  const std::size_t n = 8, d = 12;
  const CompressorSpec spec = CompressorSpec::rand_k(d, 3);
  RandomStream probe(12);
  std::vector<Vector> xs(n, Vector(d));
  double mean_norm2 = 0.0;
  for (auto& x : xs) {
    for (std::size_t j = 0; j < d; ++j) x[j] = probe.normal();
    mean_norm2 += x.squaredNorm() / n;
  }
  std::vector<RandomStream> streams;
  for (std::size_t i = 0; i < n; ++i) streams.emplace_back(derive_seed(13, {stream_tag::client, i}));
  const int trials = 40'000;
  double err = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vector avg = Vector::Zero(d);
    for (std::size_t i = 0; i < n; ++i) avg += (compress(spec, xs[i], streams[i]).payload - xs[i]) / double(n);
    err += avg.squaredNorm();
  }
  const double ratio = err / trials / mean_norm2;
  EXPECT_LE(ratio, omega_av(spec, n) * 1.05 + 5.0 / std::sqrt(double(trials)));
  EXPECT_GE(ratio, omega_av(spec, n) * 0.5);
}

TEST(Certification, MisdeclaredOmegaFails) {
  RandomStream rng(14);
  const CertificationReport r =
      certify_compressor(CompressorSpec::rand_k(10, 1), Vector::Ones(10), 20'000, rng, 4.0);
  EXPECT_TRUE(r.unbiased);
  EXPECT_FALSE(r.variance_ok);
  EXPECT_FALSE(r.passed());
}

TEST(Compress, RejectsBadInput) {
  RandomStream rng(15);
  EXPECT_THROW(compress(CompressorSpec::rand_k(4, 2), Vector::Ones(3), rng), InputError);
  Vector bad = Vector::Ones(4);
  bad[2] = std::nan("");
  EXPECT_THROW(compress(CompressorSpec::natural(4), bad, rng), InputError);
  EXPECT_THROW(CompressorSpec::rand_k(4, 0).validate(), InputError);
  EXPECT_THROW(CompressorSpec::rand_k(4, 5).validate(), InputError);
  EXPECT_THROW(parse_compressor_kind("topk"), InputError);
}

TEST(Compress, ParsesNamesAndLabels) {
  EXPECT_EQ(parse_compressor_kind("rand_k"), CompressorKind::rand_k);
  EXPECT_EQ(parse_compressor_kind("rand-k"), CompressorKind::rand_k);
  EXPECT_EQ(parse_compressor_kind("l1_selection"), CompressorKind::l1_selection);
  EXPECT_EQ(CompressorSpec::rand_k(10, 2).label(), "rand_k2");
  EXPECT_EQ(CompressorSpec::rand_k_natural(10, 2).label(), "rand_k2_natural");
}
