#include <cmath>
#include <limits>

#include "locodl/algorithms.hpp"
#include "locodl/error.hpp"

namespace locodl {

void folded_gradient_into(const Problem& problem, std::size_t i, const Vector& x, Vector& out, Vector& scratch) {
  problem.local(i).gradient_into(x, out);
  problem.shared().gradient_into(x, scratch);
  out += scratch;
}

double folded_smoothness(const Problem& problem) {
  double l = 0.0;
  for (const auto& f : problem.locals()) l = std::max(l, f.smoothness());
  return l + problem.shared().smoothness();
}

double folded_strong_convexity(const Problem& problem) {
  double mu = std::numeric_limits<double>::infinity();
  for (const auto& f : problem.locals()) mu = std::min(mu, f.strong_convexity());
  return mu + problem.shared().strong_convexity();
}

// --- GD -------------------------------------------------------------------

GdState GdState::zeros(std::size_t dim) {
  GdState s;
  s.x = Vector::Zero(static_cast<Eigen::Index>(dim));
  return s;
}

void gd_step(GdState& state, const Problem& problem, double gamma) {
  const std::size_t n = problem.clients();
  Vector sum = Vector::Zero(state.x.size());
  Vector grad(state.x.size());
  Vector scratch(state.x.size());
  for (std::size_t i = 0; i < n; ++i) {
    folded_gradient_into(problem, i, state.x, grad, scratch);
    sum += grad;
  }
  state.x -= (gamma / static_cast<double>(n)) * sum;
  ++state.t;
  ++state.rounds;
  state.bits_per_client += bit_cost(CompressorSpec::identity(problem.dim()));
}

// --- DIANA ----------------------------------------------------------------

DianaParams diana_default_params(const Problem& problem, const CompressorSpec& spec) {
  const double om = omega(spec);
  const auto n = static_cast<double>(problem.clients());
  DianaParams params;
  params.alpha = 1.0 / (1.0 + om);
  params.gamma = 1.0 / (folded_smoothness(problem) * (1.0 + 2.0 * om / n));
  return params;
}

DianaState DianaState::zeros(std::size_t n, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  DianaState s;
  s.x = Vector::Zero(d);
  s.h.assign(n, Vector::Zero(d));
  return s;
}

void diana_step(DianaState& state, const Problem& problem, std::span<const CompressorSpec> specs,
                const DianaParams& params, RunStreams& streams, DianaWorkspace& ws) {
  const std::size_t n = problem.clients();
  if (specs.size() != n || state.h.size() != n) throw InputError("diana_step: client counts differ");
  ws.estimate = Vector::Zero(state.x.size());
  for (std::size_t i = 0; i < n; ++i) {
    folded_gradient_into(problem, i, state.x, ws.grad, ws.scratch);
    ws.grad -= state.h[i];
    compress_into(specs[i], ws.grad, streams.client(i), ws.message);
    ws.estimate += state.h[i] + ws.message;
    state.h[i] += params.alpha * ws.message;
  }
  state.x -= (params.gamma / static_cast<double>(n)) * ws.estimate;
  ++state.t;
  ++state.rounds;
  state.bits_per_client += bit_cost(specs.front());
}

// --- Scaffnew -------------------------------------------------------------

ScaffnewParams scaffnew_default_params(const Problem& problem) {
  const double l = folded_smoothness(problem);
  const double mu = folded_strong_convexity(problem);
  return {1.0 / l, std::min(1.0, 1.0 / std::sqrt(l / mu))};
}

ScaffnewState ScaffnewState::zeros(std::size_t n, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  ScaffnewState s;
  s.x.assign(n, Vector::Zero(d));
  s.h.assign(n, Vector::Zero(d));
  return s;
}

Vector ScaffnewState::average() const {
  Vector avg = Vector::Zero(x.front().size());
  for (const auto& xi : x) avg += xi;
  return avg / static_cast<double>(x.size());
}

void scaffnew_step(ScaffnewState& state, const Problem& problem, const ScaffnewParams& params,
                   RunStreams& streams, std::vector<Vector>& x_hat, Vector& grad, Vector& scratch) {
  const std::size_t n = problem.clients();
  x_hat.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    folded_gradient_into(problem, i, state.x[i], grad, scratch);
    x_hat[i] = state.x[i] - params.gamma * (grad - state.h[i]);
  }
  ++state.t;
  if (!streams.coin().bernoulli(params.p)) {
    for (std::size_t i = 0; i < n; ++i) state.x[i].swap(x_hat[i]);
    return;
  }
  Vector avg = Vector::Zero(x_hat.front().size());
  for (const auto& xh : x_hat) avg += xh;
  avg /= static_cast<double>(n);
  const double dual = params.p / params.gamma;
  for (std::size_t i = 0; i < n; ++i) {
    state.h[i] += dual * (avg - x_hat[i]);
    state.x[i] = avg;
  }
  ++state.rounds;
  state.bits_per_client += bit_cost(CompressorSpec::identity(problem.dim()));
}

}  // namespace locodl
