#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "locodl/algorithms.hpp"
#include "locodl/compressors.hpp"
#include "locodl/data.hpp"
#include "locodl/objectives.hpp"
#include "locodl/trace.hpp"

namespace locodl {

enum class Algorithm { locodl, gd, diana, scaffnew };

std::string_view to_string(Algorithm algorithm) noexcept;
Algorithm parse_algorithm(std::string_view name);

enum class SourceKind {
  libsvm,              // dataset file, shuffled and split equally
  synthetic_logistic,  // Gaussian features, planted logistic labels
  dirichlet,           // one Dirichlet(alpha) sample per client
  quadratic,           // random quadratics with spectrum in [mu, L]
};

std::string_view to_string(SourceKind kind) noexcept;
SourceKind parse_source_kind(std::string_view name);

struct ProblemSource {
  SourceKind kind = SourceKind::quadratic;
  std::string path;                     // libsvm only
  std::string name;                     // dataset label; defaults from kind / file name
  std::size_t dim = 10;                 // synthetic sources
  std::size_t samples_per_client = 20;  // synthetic_logistic
  double alpha = 1.0;                   // dirichlet
  /// Fixes the data (shuffle / synthetic draw) independently of the run seed.
  std::optional<std::uint64_t> data_seed;
  /// Solve min (1/n) sum f_i without a shared g through the g = 0 reduction.
  bool g_zero = false;
};

/// Explicit values that replace the default schedule.
struct ParamsOverride {
  std::optional<double> gamma;
  std::optional<double> chi;
  std::optional<double> rho;
  std::optional<double> p;
  std::optional<double> alpha;  // DIANA shift stepsize
};

struct StopRule {
  std::optional<double> lyapunov_ratio;  // Psi^t / Psi^0 <= value (LoCoDL only)
  std::optional<double> sqdist_ratio;    // sqdist_mean^t / sqdist_mean^0 <= value
  std::uint64_t max_iterations = 1'000'000;
};

struct RecordCadence {
  bool every_round = true;
  std::uint64_t every_iterations = 100;  // 0 disables iteration-based recording
};

struct ExperimentConfig {
  ProblemSource source;
  std::size_t clients = 5;
  double kappa = 100.0;
  Algorithm algorithm = Algorithm::locodl;
  CompressorKind compressor = CompressorKind::identity;
  std::optional<std::size_t> k;  // unset: ceil(d / n)
  ParamsOverride overrides;
  std::vector<std::uint64_t> seeds{1};
  StopRule stop;
  RecordCadence record;
  /// Fraction of clients taking part in a round (LoCoDL with rho = 1 only).
  double participation = 1.0;
  /// Content hash of the configuration text, copied into trace metadata.
  std::string config_hash;

  /// Throws InputError for structurally invalid settings.
  void validate() const;
};

/// Problem together with its reference solution and provenance notes.
struct BuiltProblem {
  std::shared_ptr<const Problem> problem;
  ReferenceSolution reference;
  std::string dataset;
  std::vector<std::pair<std::string, std::string>> metadata;
};

enum class ReferenceMethod { newton, gradient_descent };

/// Computes x* to ||grad F(x*)|| <= tol * mu_F * max(1, ||x*||), then u_i* = grad f_i(x*),
/// v* = grad g(x*). Throws ConvergenceError when the tolerance cannot be met.
ReferenceSolution solve_reference(const Problem& problem, double tol = 1e-10,
                                  ReferenceMethod method = ReferenceMethod::newton,
                                  std::uint64_t max_iterations = 10'000'000);

/// Random quadratics: every f_i has spectrum in [mu, L] with both ends attained.
std::vector<LocalFunction> random_quadratics(std::size_t n, std::size_t dim, double smoothness,
                                             double strong_convexity, std::uint64_t seed);

/// Builds the problem described by the source for (n, kappa) and solves for x*.
BuiltProblem build_problem(const ProblemSource& source, std::size_t clients, double kappa, std::uint64_t seed);

/// Parameters a run will use, after defaults and overrides.
struct ResolvedMethod {
  Algorithm algorithm = Algorithm::locodl;
  CompressorSpec spec;
  AlgoParams locodl;        // LoCoDL schedule
  DianaParams diana;        // DIANA
  ScaffnewParams scaffnew;  // Scaffnew
  double gd_gamma = 0.0;    // GD
  double tau = 0.0;         // contraction factor of the method's guarantee

  double gamma() const noexcept;
  double p() const noexcept;
};

/// Applies default schedules and overrides, then checks the method's
/// conditions (ConfigError names the violated one).
ResolvedMethod resolve_method(const ExperimentConfig& config, const Problem& problem);

/// Runs one seed on an already-built problem.
ExperimentTrace run_single(const ExperimentConfig& config, const BuiltProblem& built, std::uint64_t seed);

/// Runs every seed; the problem is rebuilt per seed unless source.data_seed is set.
std::vector<ExperimentTrace> run_experiment(const ExperimentConfig& config);

/// Bits per client when the stop rule fired, +infinity if it never did.
double bits_to_target(const ExperimentTrace& trace);

/// Median of the values (mean of the two middle ones for even counts).
double median(std::vector<double> values);

/// Least-squares slope of log(bits) against log(kappa). Needs >= 3 points.
double fit_communication_exponent(const std::map<double, double>& bits_by_kappa);

enum class SweepKey { kappa, clients };
SweepKey parse_sweep_key(std::string_view name);

struct SweepCell {
  double value = 0.0;
  double median_bits = 0.0;
  std::size_t reached = 0;
  std::size_t seeds = 0;
  std::vector<ExperimentTrace> traces;
};

/// Runs the configuration once per value of the swept key.
std::vector<SweepCell> sweep(const ExperimentConfig& config, SweepKey key, const std::vector<double>& values);

}  // namespace locodl
