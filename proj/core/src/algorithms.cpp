#include "locodl/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "locodl/error.hpp"

namespace locodl {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

void validate_params(const AlgoParams& params, double smoothness) {
  const auto& [gamma, chi, rho, p, om, om_av] = params;
  if (!(gamma > 0.0) || !(gamma < 2.0 / smoothness)) {
    throw ConfigError("condition 0 < gamma < 2/L violated: gamma=" + fmt(gamma) + ", 2/L=" + fmt(2.0 / smoothness));
  }
  if (!(chi > 0.0)) throw ConfigError("condition chi > 0 violated: chi=" + fmt(chi));
  if (!(rho > 0.0) || rho > 1.0) throw ConfigError("condition 0 < rho <= 1 violated: rho=" + fmt(rho));
  if (!(p > 0.0) || p > 1.0) throw ConfigError("condition 0 < p <= 1 violated: p=" + fmt(p));
  if (om < 0.0 || om_av < 0.0) throw ConfigError("condition omega, omega_av >= 0 violated");
  const double slack = 2.0 * rho - rho * rho * (1.0 + om_av) - chi;
  // Relative tolerance so that chi set exactly at the bound passes despite rounding.
  if (slack < -1e-12 * std::max(1.0, chi)) {
    throw ConfigError("condition 2*rho - rho^2*(1+omega_av) - chi >= 0 violated: value=" + fmt(slack) +
                      " (rho=" + fmt(rho) + ", chi=" + fmt(chi) + ", omega_av=" + fmt(om_av) + ")");
  }
}

AlgoParams default_params(double smoothness, double strong_convexity, double om, double om_av) {
  if (!(strong_convexity > 0.0) || strong_convexity > smoothness) {
    throw InputError("default_params: need 0 < mu <= L");
  }
  AlgoParams params;
  params.omega = om;
  params.omega_av = om_av;
  params.gamma = 1.0 / smoothness;
  params.chi = 1.0 / (1.0 + om_av);
  params.rho = params.chi;
  const double kappa = smoothness / strong_convexity;
  params.p = std::min(std::sqrt((1.0 + om_av) * (1.0 + om) / kappa), 1.0);
  return params;
}

AlgoParams default_params(double smoothness, double strong_convexity, const CompressorSpec& spec, std::size_t n) {
  return default_params(smoothness, strong_convexity, omega(spec), omega_av(spec, n));
}

AlgoParams rand_k_params(double smoothness, double strong_convexity, std::size_t dim, std::size_t n,
                         std::size_t k) {
  const CompressorSpec spec = CompressorSpec::rand_k(dim, k);
  AlgoParams params;
  params.omega = omega(spec);
  params.omega_av = omega_av(spec, n);
  params.gamma = 1.0 / smoothness;
  const auto d = static_cast<double>(dim);
  const auto nn = static_cast<double>(n);
  const auto kk = static_cast<double>(k);
  params.chi = nn / (nn - 1.0 + d / kk);
  params.rho = params.chi;
  const double kappa = smoothness / strong_convexity;
  params.p = std::min(std::sqrt((d * kk * (nn - 1.0) + d * d) / (nn * kk * kk * kappa)), 1.0);
  return params;
}

double gd_rate(double gamma, double smoothness, double strong_convexity) noexcept {
  const double r = std::max(1.0 - gamma * strong_convexity, gamma * smoothness - 1.0);
  return r * r;
}

double rate_bound(const AlgoParams& params, double smoothness, double strong_convexity) {
  validate_params(params, smoothness);
  const double a = 1.0 - params.gamma * strong_convexity;
  const double b = 1.0 - params.gamma * smoothness;
  const double c = 1.0 - params.p * params.p * params.chi / (1.0 + 2.0 * params.omega);
  const double tau = std::max({a * a, b * b, c});
  if (!(tau < 1.0)) throw ConfigError("rate bound tau=" + fmt(tau) + " is not below 1");
  return tau;
}

// --- state ----------------------------------------------------------------

LoCoDLState LoCoDLState::zeros(std::size_t n, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  LoCoDLState s;
  s.x.assign(n, Vector::Zero(d));
  s.u.assign(n, Vector::Zero(d));
  s.y = Vector::Zero(d);
  s.v = Vector::Zero(d);
  s.bits_uplink.assign(n, 0);
  return s;
}

double LoCoDLState::dual_residual() const {
  Vector sum = Vector::Zero(v.size());
  for (const auto& ui : u) sum += ui;
  return (sum / static_cast<double>(u.size()) + v).lpNorm<Eigen::Infinity>();
}

double LoCoDLState::dual_scale() const {
  double m = 0.0;
  for (const auto& ui : u) m = std::max(m, ui.lpNorm<Eigen::Infinity>());
  return m;
}

RunStreams::RunStreams(std::uint64_t master_seed, std::size_t clients)
    : coin_(derive_seed(master_seed, {stream_tag::coin})),
      participation_(derive_seed(master_seed, {stream_tag::participation})) {
  clients_.reserve(clients);
  for (std::size_t i = 0; i < clients; ++i) {
    clients_.emplace_back(derive_seed(master_seed, {stream_tag::client, i}));
  }
}

// --- LoCoDL ---------------------------------------------------------------

void locodl_step_with_coin(LoCoDLState& state, const Problem& problem, std::span<const CompressorSpec> specs,
                           const AlgoParams& params, bool communicate, RunStreams& streams,
                           LoCoDLWorkspace& ws, std::span<const bool> participating) {
  const std::size_t n = state.clients();
  const auto d = static_cast<Eigen::Index>(problem.dim());
  if (n != problem.clients() || specs.size() != n) {
    throw InputError("locodl_step: state, problem and compressor counts differ");
  }
  if (!participating.empty() && participating.size() != n) {
    throw InputError("locodl_step: participation mask has the wrong length");
  }
  if (!participating.empty() && params.rho != 1.0) {
    throw ConfigError("partial participation requires rho = 1");
  }
  const double gamma = params.gamma;

  ws.x_hat.resize(n);
  ws.messages.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    problem.local(i).gradient_into(state.x[i], ws.grad);
    ws.x_hat[i] = state.x[i] - gamma * ws.grad + gamma * state.u[i];
  }
  problem.shared().gradient_into(state.y, ws.grad);
  ws.y_hat = state.y - gamma * ws.grad + gamma * state.v;

  if (!communicate) {
    for (std::size_t i = 0; i < n; ++i) state.x[i].swap(ws.x_hat[i]);
    state.y.swap(ws.y_hat);
    ++state.t;
    return;
  }

  ws.d_bar = Vector::Zero(d);
  Vector diff(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (!participating.empty() && !participating[i]) {
      ws.messages[i] = Vector::Zero(d);
      continue;
    }
    diff = ws.x_hat[i] - ws.y_hat;
    if (compress_into(specs[i], diff, streams.client(i), ws.messages[i])) ++state.saturation_events;
    ws.d_bar += ws.messages[i];
    state.bits_uplink[i] += bit_cost(specs[i]);
  }
  ws.d_bar /= 2.0 * static_cast<double>(n);

  const double rho = params.rho;
  const double dual = params.dual_step();
  for (std::size_t i = 0; i < n; ++i) {
    state.x[i] = (1.0 - rho) * ws.x_hat[i] + rho * (ws.y_hat + ws.d_bar);
    state.u[i] += dual * (ws.d_bar - ws.messages[i]);
  }
  state.y = ws.y_hat + rho * ws.d_bar;
  state.v += dual * ws.d_bar;
  ++state.rounds;
  ++state.t;
}

void locodl_step(LoCoDLState& state, const Problem& problem, std::span<const CompressorSpec> specs,
                 const AlgoParams& params, RunStreams& streams, LoCoDLWorkspace& ws,
                 std::span<const bool> participating) {
  const bool communicate = streams.coin().bernoulli(params.p);
  locodl_step_with_coin(state, problem, specs, params, communicate, streams, ws, participating);
}

double lyapunov(const LoCoDLState& state, const ReferenceSolution& ref, const AlgoParams& params) {
  const auto n = static_cast<double>(state.clients());
  double primal = 0.0;
  double dual = 0.0;
  for (std::size_t i = 0; i < state.clients(); ++i) {
    primal += (state.x[i] - ref.x_star).squaredNorm();
    dual += (state.u[i] - ref.u_star[i]).squaredNorm();
  }
  primal += n * (state.y - ref.x_star).squaredNorm();
  dual += n * (state.v - ref.v_star).squaredNorm();
  const double dual_weight = params.gamma * (1.0 + 2.0 * params.omega) / (params.p * params.p * params.chi);
  return primal / params.gamma + dual_weight * dual;
}

}  // namespace locodl
