#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "locodl/compressors.hpp"
#include "locodl/objectives.hpp"
#include "locodl/random.hpp"

namespace locodl {

/// Step sizes and communication probability of LoCoDL.
struct AlgoParams {
  double gamma = 0.0;  // primal stepsize
  double chi = 0.0;
  double rho = 0.0;
  double p = 0.0;  // communication probability
  double omega = 0.0;
  double omega_av = 0.0;

  /// p chi / (gamma (1 + 2 omega)).
  double dual_step() const noexcept { return p * chi / (gamma * (1.0 + 2.0 * omega)); }
};

/// Throws ConfigError naming the violated condition unless 0 < gamma < 2/L,
/// chi > 0, rho in (0, 1], p in (0, 1] and 2 rho - rho^2 (1 + omega_av) - chi >= 0.
void validate_params(const AlgoParams& params, double smoothness);

/// gamma = 1/L, chi = rho = 1/(1 + omega_av), p = min(sqrt((1 + omega_av)(1 + omega)/kappa), 1).
AlgoParams default_params(double smoothness, double strong_convexity, double omega, double omega_av);

/// default_params for a compressor family shared by n independent clients.
AlgoParams default_params(double smoothness, double strong_convexity, const CompressorSpec& spec, std::size_t n);

/// The rand-k schedule written in terms of (d, n, k):
/// chi = rho = n / (n - 1 + d/k), p = min(sqrt((d k (n-1) + d^2) / (n k^2 kappa)), 1).
AlgoParams rand_k_params(double smoothness, double strong_convexity, std::size_t dim, std::size_t n, std::size_t k);

/// max((1 - gamma mu)^2, (1 - gamma L)^2, 1 - p^2 chi / (1 + 2 omega)).
/// Throws ConfigError if the parameters are invalid or the result is not below 1.
double rate_bound(const AlgoParams& params, double smoothness, double strong_convexity);

/// max(1 - gamma mu, gamma L - 1)^2, the gradient-descent rate; diagnostic only.
double gd_rate(double gamma, double smoothness, double strong_convexity) noexcept;

/// Full iterate of LoCoDL. y and v are the copies every client holds; they are stored once.
struct LoCoDLState {
  std::vector<Vector> x;
  Vector y;
  std::vector<Vector> u;
  Vector v;
  std::uint64_t t = 0;
  std::uint64_t rounds = 0;
  std::vector<std::uint64_t> bits_uplink;
  std::uint64_t saturation_events = 0;

  /// x_i = y = 0 and u_i = v = 0.
  static LoCoDLState zeros(std::size_t n, std::size_t dim);

  std::size_t clients() const noexcept { return x.size(); }
  /// ||(1/n) sum u_i + v||_inf.
  double dual_residual() const;
  /// max_i ||u_i||_inf.
  double dual_scale() const;
};

/// x*, u_i* = grad f_i(x*), v* = grad g(x*).
struct ReferenceSolution {
  Vector x_star;
  std::vector<Vector> u_star;
  Vector v_star;
  double f_star = 0.0;
  double residual = 0.0;  // ||grad F(x*)||
};

/// Random streams consumed by one run: a shared coin plus one stream per client.
class RunStreams {
 public:
  RunStreams(std::uint64_t master_seed, std::size_t clients);

  RandomStream& coin() noexcept { return coin_; }
  RandomStream& client(std::size_t i) { return clients_.at(i); }
  RandomStream& participation() noexcept { return participation_; }

 private:
  RandomStream coin_;
  RandomStream participation_;
  std::vector<RandomStream> clients_;
};

/// Reusable buffers for locodl_step.
struct LoCoDLWorkspace {
  std::vector<Vector> x_hat;
  std::vector<Vector> messages;
  Vector grad;
  Vector y_hat;
  Vector d_bar;
};

/// One LoCoDL iteration. Every client shares a single coin draw; on a
/// communication round client i uploads C_i(x_hat_i - y_hat). When
/// participating is non-empty, clients with participating[i] == false send
/// d_i = 0 and are not metered (requires rho == 1).
///
/// Parameters are not re-validated here; run validate_params once beforehand.
void locodl_step(LoCoDLState& state, const Problem& problem, std::span<const CompressorSpec> specs,
                 const AlgoParams& params, RunStreams& streams, LoCoDLWorkspace& workspace,
                 std::span<const bool> participating = {});

/// Same iteration with the coin outcome forced; used to condition trajectories.
void locodl_step_with_coin(LoCoDLState& state, const Problem& problem, std::span<const CompressorSpec> specs,
                           const AlgoParams& params, bool communicate, RunStreams& streams,
                           LoCoDLWorkspace& workspace, std::span<const bool> participating = {});

/// Psi = (1/gamma)(sum ||x_i - x*||^2 + n ||y - x*||^2)
///     + (gamma (1 + 2 omega) / (p^2 chi))(sum ||u_i - u_i*||^2 + n ||v - v*||^2).
double lyapunov(const LoCoDLState& state, const ReferenceSolution& ref, const AlgoParams& params);

// --- baselines ------------------------------------------------------------
// Baselines solve the same problem with g folded into every local function:
// client i works with f_i + g.

/// grad f_i(x) + grad g(x) written into out.
void folded_gradient_into(const Problem& problem, std::size_t i, const Vector& x, Vector& out, Vector& scratch);
/// Smoothness / strong convexity of the folded functions f_i + g.
double folded_smoothness(const Problem& problem);
double folded_strong_convexity(const Problem& problem);

struct GdState {
  Vector x;
  std::uint64_t t = 0;
  std::uint64_t rounds = 0;
  std::uint64_t bits_per_client = 0;

  static GdState zeros(std::size_t dim);
};

/// x <- x - gamma (1/n) sum_i grad(f_i + g)(x); one uncompressed round (32d bits per client).
void gd_step(GdState& state, const Problem& problem, double gamma);

struct DianaParams {
  double gamma = 0.0;
  double alpha = 0.0;  // shift stepsize
};

/// alpha = 1/(1 + omega), gamma = 1 / (L (1 + 2 omega / n)) on the folded functions.
DianaParams diana_default_params(const Problem& problem, const CompressorSpec& spec);

struct DianaState {
  Vector x;
  std::vector<Vector> h;  // gradient shifts
  std::uint64_t t = 0;
  std::uint64_t rounds = 0;
  std::uint64_t bits_per_client = 0;

  static DianaState zeros(std::size_t n, std::size_t dim);
};

struct DianaWorkspace {
  Vector grad;
  Vector scratch;
  Vector message;
  Vector estimate;
};

/// m_i = C_i(grad_i(x) - h_i); x <- x - gamma (1/n) sum (h_i + m_i); h_i <- h_i + alpha m_i.
void diana_step(DianaState& state, const Problem& problem, std::span<const CompressorSpec> specs,
                const DianaParams& params, RunStreams& streams, DianaWorkspace& workspace);

struct ScaffnewParams {
  double gamma = 0.0;
  double p = 0.0;
};

/// gamma = 1/L and p = 1/sqrt(kappa) on the folded functions.
ScaffnewParams scaffnew_default_params(const Problem& problem);

struct ScaffnewState {
  std::vector<Vector> x;
  std::vector<Vector> h;  // control variates, sum_i h_i = 0
  std::uint64_t t = 0;
  std::uint64_t rounds = 0;
  std::uint64_t bits_per_client = 0;

  static ScaffnewState zeros(std::size_t n, std::size_t dim);
  Vector average() const;
};

/// x_hat_i = x_i - gamma (grad_i(x_i) - h_i); with probability p (shared coin)
/// x_i <- mean_j x_hat_j and h_i <- h_i + (p/gamma)(x_i - x_hat_i); otherwise x_i <- x_hat_i.
void scaffnew_step(ScaffnewState& state, const Problem& problem, const ScaffnewParams& params,
                   RunStreams& streams, std::vector<Vector>& x_hat, Vector& grad, Vector& scratch);

}  // namespace locodl
