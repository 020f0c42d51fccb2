#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "locodl/error.hpp"
#include "locodl/harness.hpp"

using namespace locodl;

namespace {

ExperimentConfig quadratic_config() {
  ExperimentConfig c;
  c.source.kind = SourceKind::quadratic;
  c.source.dim = 10;
  c.source.data_seed = 3;
  c.clients = 5;
  c.kappa = 100.0;
  c.compressor = CompressorKind::rand_k;
  c.k = 1;
  c.stop.lyapunov_ratio = 1e-8;
  return c;
}

}  // namespace

TEST(SolveReference, ShiftedIdentityQuadratic) {
  const Vector c{{1.5, -2.0, 0.25}};
  const Problem problem({LocalFunction::quadratic(Matrix::Identity(3, 3), c, 0.0)}, LocalFunction::ridge(3, 0.0));
  const ReferenceSolution ref = solve_reference(problem, 1e-12);
  EXPECT_NEAR((ref.x_star - c).norm(), 0.0, 1e-12);
}

TEST(SolveReference, DiagonalSystem) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  const Problem problem({LocalFunction::quadratic(a, Vector{{1.0, 2.0}}, 0.0)}, LocalFunction::ridge(2, 0.0));
  for (auto method : {ReferenceMethod::newton, ReferenceMethod::gradient_descent}) {
    const ReferenceSolution ref = solve_reference(problem, 1e-12, method);
    EXPECT_NEAR(ref.x_star[0], 1.0, 1e-11);
    EXPECT_NEAR(ref.x_star[1], 1.0, 1e-11);
  }
}

TEST(SolveReference, StationarityOfDuals) {
  ProblemSource source;
  source.kind = SourceKind::synthetic_logistic;
  source.dim = 8;
  source.samples_per_client = 15;
  const BuiltProblem built = build_problem(source, 6, 1e3, 4);
  const ReferenceSolution& ref = built.reference;
  Vector sum = ref.v_star;
  for (const auto& u : ref.u_star) sum += u / double(ref.u_star.size());
  EXPECT_LE(sum.norm(), 1e-10 * built.problem->strong_convexity() * std::max(1.0, ref.x_star.norm()));
}

TEST(SolveReference, NewtonAgreesWithGradientDescentAndTighterTolerance) {
  ProblemSource source;
  source.kind = SourceKind::synthetic_logistic;
  source.dim = 6;
  source.samples_per_client = 10;
  const BuiltProblem built = build_problem(source, 4, 100.0, 5);
  const ReferenceSolution gd = solve_reference(*built.problem, 1e-10, ReferenceMethod::gradient_descent);
  const ReferenceSolution half = solve_reference(*built.problem, 5e-11);
  const double scale = std::max(1.0, built.reference.x_star.norm());
  EXPECT_LE((gd.x_star - built.reference.x_star).norm(), 1e-8 * scale);
  EXPECT_LE((half.x_star - built.reference.x_star).norm(), 1e-8 * scale);
}

TEST(SolveReference, ReportsConvergenceFailure) {
  const Problem problem({LocalFunction::quadratic(Matrix::Identity(2, 2), Vector::Ones(2), 0.0)},
                        LocalFunction::ridge(2, 1e-3));
  try {
    solve_reference(problem, 1e-30, ReferenceMethod::gradient_descent, 3);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.code(), ExitCode::convergence);
  }
}

TEST(RandomQuadratics, SpectrumEndpointsAttained) {
  const auto fs = random_quadratics(3, 6, 50.0, 2.0, 7);
  for (const auto& f : fs) {
    EXPECT_NEAR(f.smoothness(), 50.0, 1e-9);
    EXPECT_NEAR(f.strong_convexity(), 2.0, 1e-9);
  }
}

TEST(BuildProblem, QuadraticConstants) {
  ProblemSource source;
  source.dim = 5;
  const BuiltProblem built = build_problem(source, 4, 250.0, 1);
  EXPECT_NEAR(built.problem->smoothness(), 250.0, 1e-9);
  EXPECT_NEAR(built.problem->strong_convexity(), 1.0, 1e-12);
  EXPECT_EQ(built.dataset, "quadratic");
}

TEST(BuildProblem, LogisticKappaAndGZero) {
  ProblemSource source;
  source.kind = SourceKind::synthetic_logistic;
  source.dim = 5;
  const BuiltProblem built = build_problem(source, 4, 1e3, 2);
  EXPECT_LE(built.problem->kappa(), 1e3 * (1 + 1e-9));
  EXPECT_GT(built.problem->kappa(), 1e3 * 0.999);

  source.g_zero = true;
  const BuiltProblem reduced = build_problem(source, 4, 1e3, 2);
  EXPECT_GE(reduced.problem->kappa(), 1e3 * 0.999);
  EXPECT_LE(reduced.problem->kappa(), 2e3 * (1 + 1e-9));
}

TEST(Experiment, LyapunovStopRuleTerminates) {
  const ExperimentConfig c = quadratic_config();
  const auto traces = run_experiment(c);
  ASSERT_EQ(traces.size(), 1u);
  const ExperimentTrace& t = traces.front();
  EXPECT_TRUE(t.reached_target);
  EXPECT_LE(t.final().lyapunov, 1e-8 * t.initial().lyapunov);
  EXPECT_LE(t.max_dual_violation, 1e-9);
}

TEST(Experiment, ZeroIterations) {
  ExperimentConfig c = quadratic_config();
  c.stop = StopRule{};
  c.stop.max_iterations = 0;
  const auto traces = run_experiment(c);
  ASSERT_EQ(traces.front().rows.size(), 1u);
  EXPECT_EQ(traces.front().rows.front().bits_per_client, 0.0);
  EXPECT_EQ(traces.front().rows.front().t, 0u);
}

TEST(Experiment, ByteIdenticalRerun) {
  ExperimentConfig c = quadratic_config();
  c.seeds = {4, 5};
  const auto a = run_experiment(c), b = run_experiment(c);
  for (std::size_t s = 0; s < a.size(); ++s) {
    EXPECT_EQ(trace_to_csv(a[s]), trace_to_csv(b[s]));
    EXPECT_EQ(trace_metadata_text(a[s]), trace_metadata_text(b[s]));
  }
  EXPECT_NE(trace_to_csv(a[0]), trace_to_csv(a[1]));
}

TEST(Experiment, CsvSchema) {
  ExperimentConfig c = quadratic_config();
  c.stop.max_iterations = 20;
  const ExperimentTrace t = run_experiment(c).front();
  const std::string csv = trace_to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "algorithm,dataset,n,d,kappa,compressor,seed,t,rounds,bits_per_client,sqdist_mean,sqdist_ybar,obj_gap,"
            "lyapunov");
  const CsvTable table = parse_csv(csv);
  EXPECT_EQ(table.rows.size(), t.rows.size());
}

TEST(Experiment, RecordCadence) {
  ExperimentConfig c = quadratic_config();
  c.stop = StopRule{};
  c.stop.max_iterations = 1000;
  c.record.every_round = false;
  c.record.every_iterations = 100;
  const ExperimentTrace t = run_experiment(c).front();
  ASSERT_EQ(t.rows.size(), 11u);
  for (std::size_t r = 0; r < t.rows.size(); ++r) EXPECT_EQ(t.rows[r].t, 100 * r);
}

TEST(Experiment, BaselinesRunAndHaveNoLyapunov) {
  for (Algorithm a : {Algorithm::gd, Algorithm::diana, Algorithm::scaffnew}) {
    ExperimentConfig c = quadratic_config();
    c.algorithm = a;
    c.stop = StopRule{};
    c.stop.sqdist_ratio = 1e-6;
    const ExperimentTrace t = run_experiment(c).front();
    EXPECT_TRUE(t.reached_target) << to_string(a);
    EXPECT_TRUE(std::isnan(t.final().lyapunov));
  }
  ExperimentConfig c = quadratic_config();
  c.algorithm = Algorithm::gd;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(Experiment, PartialParticipationNeedsRhoOne) {
  ExperimentConfig c = quadratic_config();
  c.participation = 0.5;
  EXPECT_THROW(run_experiment(c), ConfigError);
  c.compressor = CompressorKind::identity;
  c.overrides.chi = 1.0;
  c.overrides.rho = 1.0;
  const ExperimentTrace t = run_experiment(c).front();
  EXPECT_TRUE(t.reached_target);
}

TEST(ResolveMethod, OverrideViolatingConditionNamesIt) {
  ExperimentConfig c = quadratic_config();
  c.overrides.chi = 0.99;
  const BuiltProblem built = build_problem(c.source, c.clients, c.kappa, 0);
  try {
    resolve_method(c, *built.problem);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("2*rho - rho^2*(1+omega_av) - chi >= 0"), std::string::npos);
  }
}

TEST(ResolveMethod, DefaultKIsCeilDOverN) {
  ExperimentConfig c = quadratic_config();
  c.k.reset();
  c.clients = 3;
  const BuiltProblem built = build_problem(c.source, c.clients, c.kappa, 0);
  EXPECT_EQ(resolve_method(c, *built.problem).spec.k, 4u);
}

TEST(CommunicationExponent, ExactPowerLaws) {
  std::map<double, double> sqrt_law, linear;
  for (double kappa : {1e2, 1e3, 1e4}) {
    sqrt_law[kappa] = 7.0 * std::sqrt(kappa);
    linear[kappa] = 3.0 * kappa;
  }
  EXPECT_NEAR(fit_communication_exponent(sqrt_law), 0.5, 1e-9);
  EXPECT_NEAR(fit_communication_exponent(linear), 1.0, 1e-9);
  EXPECT_THROW(fit_communication_exponent({{1e2, 1.0}, {1e3, 2.0}}), InputError);
  sqrt_law[1e5] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(fit_communication_exponent(sqrt_law), InputError);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_THROW(median({}), InputError);
}

TEST(Sweep, OneCellPerValue) {
  ExperimentConfig c = quadratic_config();
  c.seeds = {1, 2, 3};
  const auto cells = sweep(c, SweepKey::kappa, {10.0, 30.0, 100.0});
  ASSERT_EQ(cells.size(), 3u);
  for (const auto& cell : cells) {
    EXPECT_EQ(cell.seeds, 3u);
    EXPECT_EQ(cell.reached, 3u);
    EXPECT_GT(cell.median_bits, 0.0);
  }
  EXPECT_THROW(sweep(c, SweepKey::kappa, {}), InputError);
  EXPECT_THROW(parse_sweep_key("dim"), InputError);
}

TEST(Scaffnew, FewerUplinkBitsThanGdOnA5aLike) {
  ExperimentConfig c;
  c.source.kind = SourceKind::libsvm;
  c.source.path = std::string(LOCODL_DATA_DIR) + "/a5a_like.libsvm";
  c.source.data_seed = 1;
  c.clients = 87;
  c.kappa = 1e4;
  c.stop.sqdist_ratio = 1e-5;
  c.record.every_round = false;
  c.record.every_iterations = 1000;
  c.algorithm = Algorithm::scaffnew;
  const ExperimentTrace scaffnew = run_experiment(c).front();
  c.algorithm = Algorithm::gd;
  const ExperimentTrace gd = run_experiment(c).front();
  ASSERT_TRUE(scaffnew.reached_target);
  ASSERT_TRUE(gd.reached_target);
  EXPECT_LT(bits_to_target(scaffnew), bits_to_target(gd));
}
