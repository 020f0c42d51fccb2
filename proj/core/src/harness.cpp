#include "locodl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "locodl/error.hpp"
#include "locodl/random.hpp"

namespace locodl {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  return out;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double mean_sqdist(const std::vector<Vector>& xs, const Vector& target) {
  double s = 0.0;
  for (const auto& x : xs) s += (x - target).squaredNorm();
  return s / static_cast<double>(xs.size());
}

}  // namespace

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::locodl: return "locodl";
    case Algorithm::gd: return "gd";
    case Algorithm::diana: return "diana";
    case Algorithm::scaffnew: return "scaffnew";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  const std::string key = lower(name);
  if (key == "locodl") return Algorithm::locodl;
  if (key == "gd" || key == "gradient_descent") return Algorithm::gd;
  if (key == "diana") return Algorithm::diana;
  if (key == "scaffnew" || key == "proxskip") return Algorithm::scaffnew;
  throw InputError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(SourceKind kind) noexcept {
  switch (kind) {
    case SourceKind::libsvm: return "libsvm";
    case SourceKind::synthetic_logistic: return "synthetic_logistic";
    case SourceKind::dirichlet: return "dirichlet";
    case SourceKind::quadratic: return "quadratic";
  }
  return "unknown";
}

SourceKind parse_source_kind(std::string_view name) {
  const std::string key = lower(name);
  if (key == "libsvm") return SourceKind::libsvm;
  if (key == "synthetic_logistic" || key == "logistic") return SourceKind::synthetic_logistic;
  if (key == "dirichlet") return SourceKind::dirichlet;
  if (key == "quadratic") return SourceKind::quadratic;
  throw InputError("unknown problem source '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (clients < 1) throw InputError("config: clients must be at least 1");
  if (!(kappa > 1.0)) throw InputError("config: kappa must exceed 1");
  if (seeds.empty()) throw InputError("config: seeds must be nonempty");
  if (stop.lyapunov_ratio && !(*stop.lyapunov_ratio > 0.0)) throw InputError("config: stop ratio must be positive");
  if (stop.sqdist_ratio && !(*stop.sqdist_ratio > 0.0)) throw InputError("config: stop ratio must be positive");
  if (stop.lyapunov_ratio && algorithm != Algorithm::locodl) {
    throw InputError("config: a Lyapunov stop rule needs the locodl algorithm");
  }
  if (!(participation > 0.0) || participation > 1.0) throw InputError("config: participation must lie in (0, 1]");
  if (participation < 1.0 && algorithm != Algorithm::locodl) {
    throw InputError("config: partial participation is only defined for locodl");
  }
  if (source.kind == SourceKind::libsvm && source.path.empty()) throw InputError("config: libsvm source needs a path");
  if (source.kind != SourceKind::libsvm && source.dim < 1) throw InputError("config: dim must be positive");
}

// --- reference solution ---------------------------------------------------

ReferenceSolution solve_reference(const Problem& problem, double tol, ReferenceMethod method,
                                  std::uint64_t max_iterations) {
  if (!(problem.strong_convexity() > 0.0)) throw InputError("solve_reference: problem must be strongly convex");
  const double mu = problem.strong_convexity();
  const auto d = static_cast<Eigen::Index>(problem.dim());
  auto converged = [&](const Vector& x, double residual) {
    return residual <= tol * mu * std::max(1.0, x.norm());
  };

  Vector x = Vector::Zero(d);
  Vector g = problem.gradient(x);
  double residual = g.norm();
  bool done = converged(x, residual);

  if (method == ReferenceMethod::newton) {
    double best = residual;
    int stalled = 0;
    for (std::uint64_t it = 0; it < std::min<std::uint64_t>(max_iterations, 500) && !done; ++it) {
      const Vector step = problem.hessian(x).ldlt().solve(g);
      const double f0 = problem.objective(x);
      double scale = 1.0;
      Vector trial = x - step;
      Vector g_trial = problem.gradient(trial);
      // Full Newton steps are accepted whenever they do not hurt; otherwise backtrack (Armijo).
      if (!(g_trial.norm() < residual) && !(problem.objective(trial) < f0)) {
        for (int half = 0; half < 40; ++half) {
          scale *= 0.5;
          trial = x - scale * step;
          if (problem.objective(trial) <= f0 - 1e-4 * scale * g.dot(step)) break;
        }
        g_trial = problem.gradient(trial);
      }
      x = trial;
      g = g_trial;
      residual = g.norm();
      done = converged(x, residual);
      if (residual < 0.5 * best) {
        best = residual;
        stalled = 0;
      } else if (++stalled >= 5) {
        break;
      }
    }
  } else {
    double smooth = problem.shared().smoothness();
    double local = 0.0;
    for (const auto& f : problem.locals()) local = std::max(local, f.smoothness());
    const double gamma = 1.0 / (local + smooth);
    for (std::uint64_t it = 0; it < max_iterations && !done; ++it) {
      x -= gamma * g;
      g = problem.gradient(x);
      residual = g.norm();
      done = converged(x, residual);
    }
  }
  if (!done) {
    throw ConvergenceError("solve_reference: gradient norm " + format_double(residual) + " above tolerance", residual);
  }

  ReferenceSolution ref;
  ref.x_star = x;
  ref.residual = residual;
  ref.f_star = problem.objective(x);
  ref.v_star = problem.shared().gradient(x);
  ref.u_star.reserve(problem.clients());
  for (const auto& f : problem.locals()) ref.u_star.push_back(f.gradient(x));
  return ref;
}

// --- problem construction -------------------------------------------------

std::vector<LocalFunction> random_quadratics(std::size_t n, std::size_t dim, double smoothness,
                                             double strong_convexity, std::uint64_t seed) {
  if (!(strong_convexity > 0.0) || smoothness < strong_convexity) {
    throw InputError("random_quadratics: need 0 < mu <= L");
  }
  RandomStream rng(derive_seed(seed, {stream_tag::data, 4}));
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<LocalFunction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix gauss(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) gauss(r, c) = rng.normal();
    }
    const Matrix q = Eigen::HouseholderQR<Matrix>(gauss).householderQ();
    Vector spectrum(d);
    const double top = smoothness - strong_convexity;
    for (Eigen::Index j = 0; j < d; ++j) spectrum[j] = top * rng.uniform();
    spectrum[0] = 0.0;
    if (d > 1) spectrum[d - 1] = top;
    Matrix a = q * spectrum.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose()).eval();
    Vector b(d);
    for (auto& bj : b) bj = rng.normal();
    out.push_back(LocalFunction::quadratic(std::move(a), std::move(b), strong_convexity));
  }
  return out;
}

BuiltProblem build_problem(const ProblemSource& source, std::size_t clients, double kappa, std::uint64_t seed) {
  const std::uint64_t data_seed = source.data_seed.value_or(seed);
  BuiltProblem built;
  built.metadata.emplace_back("source", std::string(to_string(source.kind)));
  built.metadata.emplace_back("data_seed", std::to_string(data_seed));

  std::vector<LocalFunction> locals;
  double mu = 0.0;
  if (source.kind == SourceKind::quadratic) {
    mu = 1.0;
    locals = random_quadratics(clients, source.dim, kappa * mu, mu, data_seed);
    built.dataset = source.name.empty() ? "quadratic" : source.name;
  } else {
    Dataset dataset;
    switch (source.kind) {
      case SourceKind::libsvm:
        dataset = load_libsvm(source.path);
        built.dataset = source.name.empty() ? std::filesystem::path(source.path).stem().string() : source.name;
        break;
      case SourceKind::synthetic_logistic:
        dataset = gaussian_logistic_synthetic(clients * source.samples_per_client, source.dim,
                                              derive_seed(data_seed, {stream_tag::data}));
        built.dataset = source.name.empty() ? "synthetic_logistic" : source.name;
        break;
      case SourceKind::dirichlet:
        dataset = dirichlet_synthetic(clients, source.dim, source.alpha, derive_seed(data_seed, {stream_tag::data}));
        built.dataset = source.name.empty() ? "dirichlet" : source.name;
        built.metadata.emplace_back("dirichlet_alpha", format_double(source.alpha));
        built.metadata.emplace_back("label_rule", "fair_coin");
        break;
      default: break;
    }
    const auto shards = partition(dataset, clients, derive_seed(data_seed, {stream_tag::data, 0}));
    built.metadata.emplace_back("rows_total", std::to_string(dataset.rows.size()));
    built.metadata.emplace_back("rows_per_client", std::to_string(shards.front().rows()));
    built.metadata.emplace_back("rows_discarded", std::to_string(dataset.rows.size() % clients));
    // mu is set from the largest per-client curvature so every f_i is L-smooth with L = kappa * mu.
    double curvature = 0.0;
    for (const auto& shard : shards) curvature = std::max(curvature, logistic_smoothness(shard, 0.0));
    mu = regularization_for_curvature(curvature, kappa);
    built.metadata.emplace_back("curvature_max_client", format_double(curvature));
    for (const auto& shard : shards) {
      locals.push_back(LocalFunction::logistic(std::make_shared<const Shard>(shard), mu));
    }
  }
  built.metadata.emplace_back("mu", format_double(mu));

  if (source.g_zero) {
    built.problem = std::make_shared<const Problem>(reduce_g_zero(locals, mu));
    built.metadata.emplace_back("g_zero_reduction", "true");
  } else {
    const std::size_t d = locals.front().dim();
    built.problem = std::make_shared<const Problem>(std::move(locals), LocalFunction::ridge(d, mu));
  }
  built.reference = solve_reference(*built.problem);
  built.metadata.emplace_back("reference_residual", format_double(built.reference.residual));
  return built;
}

// --- parameter resolution -------------------------------------------------

double ResolvedMethod::gamma() const noexcept {
  switch (algorithm) {
    case Algorithm::locodl: return locodl.gamma;
    case Algorithm::gd: return gd_gamma;
    case Algorithm::diana: return diana.gamma;
    case Algorithm::scaffnew: return scaffnew.gamma;
  }
  return 0.0;
}

double ResolvedMethod::p() const noexcept {
  switch (algorithm) {
    case Algorithm::locodl: return locodl.p;
    case Algorithm::scaffnew: return scaffnew.p;
    default: return 1.0;
  }
}

ResolvedMethod resolve_method(const ExperimentConfig& config, const Problem& problem) {
  const std::size_t n = problem.clients();
  const std::size_t d = problem.dim();
  ResolvedMethod m;
  m.algorithm = config.algorithm;

  const bool sparsifier =
      config.compressor == CompressorKind::rand_k || config.compressor == CompressorKind::rand_k_natural;
  const std::size_t k = sparsifier ? config.k.value_or((d + n - 1) / n) : 0;
  m.spec = CompressorSpec{config.compressor, d, k};
  if (config.algorithm == Algorithm::gd || config.algorithm == Algorithm::scaffnew) {
    m.spec = CompressorSpec::identity(d);
  }
  m.spec.validate();
  const ParamsOverride& o = config.overrides;

  switch (config.algorithm) {
    case Algorithm::locodl: {
      const double l = problem.smoothness();
      const double mu = problem.strong_convexity();
      m.locodl = m.spec.kind == CompressorKind::rand_k ? rand_k_params(l, mu, d, n, k)
                                                       : default_params(l, mu, m.spec, n);
      if (o.gamma) m.locodl.gamma = *o.gamma;
      if (o.chi) m.locodl.chi = *o.chi;
      if (o.rho) m.locodl.rho = *o.rho;
      if (o.p) m.locodl.p = *o.p;
      if (config.participation < 1.0 && m.locodl.rho != 1.0) {
        throw ConfigError("partial participation requires rho = 1 (got rho=" + format_double(m.locodl.rho) + ")");
      }
      m.tau = rate_bound(m.locodl, l, mu);
      break;
    }
    case Algorithm::gd: {
      const double l = folded_smoothness(problem);
      m.gd_gamma = o.gamma.value_or(1.0 / l);
      if (!(m.gd_gamma > 0.0) || !(m.gd_gamma < 2.0 / l)) {
        throw ConfigError("condition 0 < gamma < 2/L violated for gd: gamma=" + format_double(m.gd_gamma));
      }
      m.tau = gd_rate(m.gd_gamma, l, folded_strong_convexity(problem));
      break;
    }
    case Algorithm::diana: {
      m.diana = diana_default_params(problem, m.spec);
      if (o.gamma) m.diana.gamma = *o.gamma;
      if (o.alpha) m.diana.alpha = *o.alpha;
      const double l = folded_smoothness(problem);
      if (!(m.diana.gamma > 0.0) || !(m.diana.gamma < 2.0 / l)) {
        throw ConfigError("condition 0 < gamma < 2/L violated for diana: gamma=" + format_double(m.diana.gamma));
      }
      if (!(m.diana.alpha > 0.0) || m.diana.alpha > 1.0 / (1.0 + omega(m.spec))) {
        throw ConfigError("condition 0 < alpha <= 1/(1+omega) violated for diana: alpha=" +
                          format_double(m.diana.alpha));
      }
      m.tau = std::max(1.0 - m.diana.gamma * folded_strong_convexity(problem), 1.0 - 0.5 * m.diana.alpha);
      break;
    }
    case Algorithm::scaffnew: {
      m.scaffnew = scaffnew_default_params(problem);
      if (o.gamma) m.scaffnew.gamma = *o.gamma;
      if (o.p) m.scaffnew.p = *o.p;
      const double l = folded_smoothness(problem);
      if (!(m.scaffnew.gamma > 0.0) || m.scaffnew.gamma > 1.0 / l) {
        throw ConfigError("condition 0 < gamma <= 1/L violated for scaffnew: gamma=" +
                          format_double(m.scaffnew.gamma));
      }
      if (!(m.scaffnew.p > 0.0) || m.scaffnew.p > 1.0) {
        throw ConfigError("condition 0 < p <= 1 violated for scaffnew: p=" + format_double(m.scaffnew.p));
      }
      const double p2 = m.scaffnew.p * m.scaffnew.p;
      m.tau = std::max(1.0 - m.scaffnew.gamma * folded_strong_convexity(problem), 1.0 - p2);
      break;
    }
  }
  return m;
}

// --- trajectory driver ----------------------------------------------------

namespace {

/// Adapter interface expected by drive():
///   void step();  bool communicated() const;  std::uint64_t t(), rounds();
///   double bits();  double sqdist_mean();  Vector server();  double psi();
///   void after_step(ExperimentTrace&)
template <class Method>
void drive(const ExperimentConfig& config, const BuiltProblem& built, ExperimentTrace& trace, Method& method) {
  const Problem& problem = *built.problem;
  const ReferenceSolution& ref = built.reference;

  auto make_row = [&]() {
    TraceRow row;
    row.t = method.t();
    row.rounds = method.rounds();
    row.bits_per_client = method.bits();
    row.sqdist_mean = method.sqdist_mean();
    const Vector server = method.server();
    row.sqdist_ybar = (server - ref.x_star).squaredNorm();
    row.obj_gap = problem.objective(server) - ref.f_star;
    row.lyapunov = method.psi();
    return row;
  };

  trace.rows.push_back(make_row());
  const double sqdist0 = trace.rows.front().sqdist_mean;
  const double psi0 = trace.rows.front().lyapunov;
  const StopRule& stop = config.stop;
  const bool has_ratio_stop = stop.lyapunov_ratio.has_value() || stop.sqdist_ratio.has_value();

  auto target_met = [&]() {
    if (stop.sqdist_ratio) {
      if (sqdist0 == 0.0 || method.sqdist_mean() <= *stop.sqdist_ratio * sqdist0) return true;
    }
    if (stop.lyapunov_ratio) {
      if (psi0 == 0.0 || method.psi() <= *stop.lyapunov_ratio * psi0) return true;
    }
    return false;
  };

  if (has_ratio_stop && target_met()) {
    trace.reached_target = true;
    return;
  }
  for (std::uint64_t it = 0; it < stop.max_iterations; ++it) {
    method.step();
    method.after_step(trace);
    const bool reached = has_ratio_stop && target_met();
    const bool last = reached || it + 1 == stop.max_iterations;
    const std::uint64_t t = method.t();
    const bool cadence = (config.record.every_round && method.communicated()) ||
                         (config.record.every_iterations > 0 && t % config.record.every_iterations == 0);
    if (cadence || last) trace.rows.push_back(make_row());
    if (reached) {
      trace.reached_target = true;
      return;
    }
  }
}

double nan_psi() { return nan(); }

struct LoCoDLMethod {
  const Problem& problem;
  const ReferenceSolution& ref;
  const ResolvedMethod& m;
  std::vector<CompressorSpec> specs;
  RunStreams streams;
  double participation;
  LoCoDLState state;
  LoCoDLWorkspace ws;
  std::unique_ptr<bool[]> mask;
  std::uint64_t last_rounds = 0;
  bool comm = false;

  LoCoDLMethod(const Problem& pb, const ReferenceSolution& r, const ResolvedMethod& rm, std::uint64_t seed, double q)
      : problem(pb),
        ref(r),
        m(rm),
        specs(pb.clients(), rm.spec),
        streams(seed, pb.clients()),
        participation(q),
        state(LoCoDLState::zeros(pb.clients(), pb.dim())),
        mask(new bool[pb.clients()]) {}

  void step() {
    const bool communicate = streams.coin().bernoulli(m.locodl.p);
    std::span<const bool> participating;
    if (communicate && participation < 1.0) {
      for (std::size_t i = 0; i < problem.clients(); ++i) mask[i] = streams.participation().bernoulli(participation);
      participating = std::span<const bool>(mask.get(), problem.clients());
    }
    locodl_step_with_coin(state, problem, specs, m.locodl, communicate, streams, ws, participating);
    comm = communicate;
  }
  void after_step(ExperimentTrace& trace) {
    const double violation = state.dual_residual() / (1.0 + state.dual_scale());
    trace.max_dual_violation = std::max(trace.max_dual_violation, violation);
    trace.saturation_events = state.saturation_events;
  }
  bool communicated() const { return comm; }
  std::uint64_t t() const { return state.t; }
  std::uint64_t rounds() const { return state.rounds; }
  double bits() const {
    double total = 0.0;
    for (auto b : state.bits_uplink) total += static_cast<double>(b);
    return total / static_cast<double>(state.bits_uplink.size());
  }
  double sqdist_mean() const { return mean_sqdist(state.x, ref.x_star); }
  Vector server() const { return state.y; }
  double psi() const { return lyapunov(state, ref, m.locodl); }
};

struct GdMethod {
  const Problem& problem;
  const ReferenceSolution& ref;
  double gamma;
  GdState state;

  void step() { gd_step(state, problem, gamma); }
  void after_step(ExperimentTrace&) {}
  bool communicated() const { return true; }
  std::uint64_t t() const { return state.t; }
  std::uint64_t rounds() const { return state.rounds; }
  double bits() const { return static_cast<double>(state.bits_per_client); }
  double sqdist_mean() const { return (state.x - ref.x_star).squaredNorm(); }
  Vector server() const { return state.x; }
  double psi() const { return nan_psi(); }
};

struct DianaMethod {
  const Problem& problem;
  const ReferenceSolution& ref;
  DianaParams params;
  std::vector<CompressorSpec> specs;
  RunStreams streams;
  DianaState state;
  DianaWorkspace ws;

  DianaMethod(const Problem& pb, const ReferenceSolution& r, const ResolvedMethod& rm, std::uint64_t seed)
      : problem(pb),
        ref(r),
        params(rm.diana),
        specs(pb.clients(), rm.spec),
        streams(seed, pb.clients()),
        state(DianaState::zeros(pb.clients(), pb.dim())) {}

  void step() { diana_step(state, problem, specs, params, streams, ws); }
  void after_step(ExperimentTrace&) {}
  bool communicated() const { return true; }
  std::uint64_t t() const { return state.t; }
  std::uint64_t rounds() const { return state.rounds; }
  double bits() const { return static_cast<double>(state.bits_per_client); }
  double sqdist_mean() const { return (state.x - ref.x_star).squaredNorm(); }
  Vector server() const { return state.x; }
  double psi() const { return nan_psi(); }
};

struct ScaffnewMethod {
  const Problem& problem;
  const ReferenceSolution& ref;
  ScaffnewParams params;
  RunStreams streams;
  ScaffnewState state;
  std::vector<Vector> x_hat;
  Vector grad;
  Vector scratch;
  std::uint64_t last_rounds = 0;
  bool comm = false;

  ScaffnewMethod(const Problem& pb, const ReferenceSolution& r, const ResolvedMethod& rm, std::uint64_t seed)
      : problem(pb),
        ref(r),
        params(rm.scaffnew),
        streams(seed, pb.clients()),
        state(ScaffnewState::zeros(pb.clients(), pb.dim())) {}

  void step() {
    const std::uint64_t before = state.rounds;
    scaffnew_step(state, problem, params, streams, x_hat, grad, scratch);
    comm = state.rounds != before;
  }
  void after_step(ExperimentTrace&) {}
  bool communicated() const { return comm; }
  std::uint64_t t() const { return state.t; }
  std::uint64_t rounds() const { return state.rounds; }
  double bits() const { return static_cast<double>(state.bits_per_client); }
  double sqdist_mean() const { return mean_sqdist(state.x, ref.x_star); }
  Vector server() const { return state.average(); }
  double psi() const { return nan_psi(); }
};

}  // namespace

ExperimentTrace run_single(const ExperimentConfig& config, const BuiltProblem& built, std::uint64_t seed) {
  config.validate();
  const Problem& problem = *built.problem;
  const ResolvedMethod m = resolve_method(config, problem);

  ExperimentTrace trace;
  trace.algorithm = std::string(to_string(config.algorithm));
  trace.dataset = built.dataset;
  trace.compressor = m.spec.label();
  trace.n = problem.clients();
  trace.d = problem.dim();
  trace.kappa = config.kappa;
  trace.seed = seed;

  auto& meta = trace.metadata;
  meta.emplace_back("config_hash", config.config_hash.empty() ? "none" : config.config_hash);
  meta.emplace_back("algorithm", trace.algorithm);
  meta.emplace_back("compressor", trace.compressor);
  meta.emplace_back("k", std::to_string(m.spec.k));
  meta.emplace_back("dataset", trace.dataset);
  meta.emplace_back("seed", std::to_string(seed));
  meta.emplace_back("n", std::to_string(trace.n));
  meta.emplace_back("d", std::to_string(trace.d));
  meta.emplace_back("kappa_target", format_double(config.kappa));
  meta.emplace_back("L", format_double(problem.smoothness()));
  meta.emplace_back("mu_common", format_double(problem.strong_convexity()));
  meta.emplace_back("tau", format_double(m.tau));
  meta.emplace_back("gamma", format_double(m.gamma()));
  meta.emplace_back("chi", format_double(config.algorithm == Algorithm::locodl ? m.locodl.chi : nan()));
  meta.emplace_back("rho", format_double(config.algorithm == Algorithm::locodl ? m.locodl.rho : nan()));
  meta.emplace_back("p", format_double(m.p()));
  meta.emplace_back("omega", format_double(omega(m.spec)));
  meta.emplace_back("omega_av", format_double(omega_av(m.spec, problem.clients())));
  if (config.algorithm == Algorithm::diana) meta.emplace_back("alpha", format_double(m.diana.alpha));
  meta.emplace_back("bits_per_message", std::to_string(bit_cost(m.spec)));
  meta.emplace_back("participation", format_double(config.participation));
  for (const auto& kv : built.metadata) meta.push_back(kv);

  switch (config.algorithm) {
    case Algorithm::locodl: {
      LoCoDLMethod method(problem, built.reference, m, seed, config.participation);
      drive(config, built, trace, method);
      break;
    }
    case Algorithm::gd: {
      GdMethod method{problem, built.reference, m.gd_gamma, GdState::zeros(problem.dim())};
      drive(config, built, trace, method);
      break;
    }
    case Algorithm::diana: {
      DianaMethod method(problem, built.reference, m, seed);
      drive(config, built, trace, method);
      break;
    }
    case Algorithm::scaffnew: {
      ScaffnewMethod method(problem, built.reference, m, seed);
      drive(config, built, trace, method);
      break;
    }
  }
  meta.emplace_back("iterations", std::to_string(trace.final().t));
  meta.emplace_back("rounds", std::to_string(trace.final().rounds));
  meta.emplace_back("reached_target", trace.reached_target ? "true" : "false");
  meta.emplace_back("max_dual_violation", format_double(trace.max_dual_violation));
  meta.emplace_back("natural_saturation_events", std::to_string(trace.saturation_events));
  return trace;
}

std::vector<ExperimentTrace> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<ExperimentTrace> traces;
  traces.reserve(config.seeds.size());
  std::optional<BuiltProblem> shared;
  if (config.source.data_seed) shared = build_problem(config.source, config.clients, config.kappa, 0);
  for (std::uint64_t seed : config.seeds) {
    if (shared) {
      traces.push_back(run_single(config, *shared, seed));
    } else {
      const BuiltProblem built = build_problem(config.source, config.clients, config.kappa, seed);
      traces.push_back(run_single(config, built, seed));
    }
  }
  return traces;
}

double bits_to_target(const ExperimentTrace& trace) {
  return trace.reached_target ? trace.final().bits_per_client : std::numeric_limits<double>::infinity();
}

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

double fit_communication_exponent(const std::map<double, double>& bits_by_kappa) {
  if (bits_by_kappa.size() < 3) throw InputError("fit_communication_exponent: need at least 3 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [kappa, bits] : bits_by_kappa) {
    if (!(kappa > 0.0) || !(bits > 0.0) || !std::isfinite(bits)) {
      throw InputError("fit_communication_exponent: values must be positive and finite");
    }
    const double lx = std::log(kappa);
    const double ly = std::log(bits);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const auto count = static_cast<double>(bits_by_kappa.size());
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) throw InputError("fit_communication_exponent: kappa values must differ");
  return (count * sxy - sx * sy) / denom;
}

SweepKey parse_sweep_key(std::string_view name) {
  const std::string key = lower(name);
  if (key == "kappa") return SweepKey::kappa;
  if (key == "n" || key == "clients") return SweepKey::clients;
  throw InputError("cannot sweep over '" + std::string(name) + "' (use kappa or n)");
}

std::vector<SweepCell> sweep(const ExperimentConfig& config, SweepKey key, const std::vector<double>& values) {
  if (values.empty()) throw InputError("sweep: empty list of values");
  std::vector<SweepCell> cells;
  for (double value : values) {
    ExperimentConfig cell_config = config;
    if (key == SweepKey::kappa) {
      cell_config.kappa = value;
    } else {
      if (!(value >= 1.0) || value != std::floor(value)) throw InputError("sweep: n values must be positive integers");
      cell_config.clients = static_cast<std::size_t>(value);
    }
    SweepCell cell;
    cell.value = value;
    cell.traces = run_experiment(cell_config);
    std::vector<double> bits;
    for (const auto& trace : cell.traces) {
      bits.push_back(bits_to_target(trace));
      if (trace.reached_target) ++cell.reached;
    }
    cell.seeds = cell.traces.size();
    cell.median_bits = median(bits);
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace locodl
