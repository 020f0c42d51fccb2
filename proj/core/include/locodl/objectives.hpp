#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace locodl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense block of labelled samples owned by one client.
struct Shard {
  Matrix features;  // m x d
  Vector labels;    // m entries, each -1 or +1

  std::size_t rows() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }

  /// Throws InputError unless m >= 1, labels are +-1 and sizes agree.
  void validate() const;
};

/// Stable log(1 + exp(t)).
double softplus(double t) noexcept;
/// Stable 1 / (1 + exp(-t)).
double sigmoid(double t) noexcept;

/// (1/m) sum_s log(1 + exp(-b_s a_s^T x)) + (mu/2)||x||^2.
double logistic_loss(const Vector& x, const Shard& shard, double mu);
/// Gradient of logistic_loss.
Vector grad_logistic(const Vector& x, const Shard& shard, double mu);

/// Largest eigenvalue of A^T A by power iteration (tol 1e-8 relative, 10'000 iterations max).
double largest_gram_eigenvalue(const Matrix& features);

/// lambda_max(A^T A) / (4m) + mu: smoothness bound of the regularized logistic loss.
double logistic_smoothness(const Shard& shard, double mu);

/// Regularizer mu such that (c + mu) / mu == kappa_target, with c = lambda_max(A^T A)/(4m).
double regularization_for_kappa(const Shard& shard_union, double kappa_target);
/// Same solve, given the curvature c directly.
double regularization_for_curvature(double curvature, double kappa_target);

/// A smooth strongly convex function R^d -> R.
///
/// Three kinds are supported: the regularized logistic loss on a shard, the
/// quadratic (1/2) x^T A x - b^T x + (mu/2)||x||^2 (A symmetric PSD; an empty A
/// means A = 0 and an empty b means b = 0), and a base function minus
/// (c/2)||x||^2.
class LocalFunction {
 public:
  struct Logistic {
    std::shared_ptr<const Shard> shard;
    double mu;
  };
  struct Quadratic {
    Matrix a;
    Vector b;
    double mu;
  };
  struct Shifted {
    std::shared_ptr<const LocalFunction> base;
    double removed_curvature;
  };
  using Kind = std::variant<Logistic, Quadratic, Shifted>;

  static LocalFunction logistic(std::shared_ptr<const Shard> shard, double mu);
  static LocalFunction quadratic(Matrix a, Vector b, double mu);
  /// (mu/2)||x||^2 in dimension d.
  static LocalFunction ridge(std::size_t dim, double mu);
  /// base - (removed_curvature/2)||x||^2.
  static LocalFunction shifted(LocalFunction base, double removed_curvature);

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  /// Writes the gradient into out (resized as needed); avoids allocation in hot loops.
  void gradient_into(const Vector& x, Vector& out) const;
  Matrix hessian(const Vector& x) const;

  double smoothness() const noexcept { return smoothness_; }
  double strong_convexity() const noexcept { return strong_convexity_; }
  std::size_t dim() const noexcept { return dim_; }
  const Kind& kind() const noexcept { return kind_; }

  /// True for the identically-zero function (ridge with mu = 0).
  bool is_zero() const noexcept;

 private:
  LocalFunction(Kind kind, std::size_t dim, double smoothness, double strong_convexity);

  Kind kind_;
  std::size_t dim_;
  double smoothness_;
  double strong_convexity_;
};

/// min_x (1/n) sum_i f_i(x) + g(x) with common constants (L, mu).
class Problem {
 public:
  /// Constants are L = max smoothness and mu = min strong convexity over
  /// locals and shared, except that an identically-zero shared function is
  /// left out of both.
  Problem(std::vector<LocalFunction> locals, LocalFunction shared);

  std::size_t clients() const noexcept { return locals_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  double smoothness() const noexcept { return smoothness_; }
  double strong_convexity() const noexcept { return strong_convexity_; }
  double kappa() const noexcept { return smoothness_ / strong_convexity_; }

  const std::vector<LocalFunction>& locals() const noexcept { return locals_; }
  const LocalFunction& local(std::size_t i) const { return locals_.at(i); }
  const LocalFunction& shared() const noexcept { return shared_; }

  double objective(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;

 private:
  std::vector<LocalFunction> locals_;
  LocalFunction shared_;
  std::size_t dim_;
  double smoothness_;
  double strong_convexity_;
};

/// Rewrites min (1/n) sum f_i as min (1/n) sum f~_i + g~ with
/// f~_i = f_i - (mu/4)||.||^2 and g~ = (mu/4)||.||^2.
/// Resulting constants: L~ = L - mu/2, mu~ = mu/2.
Problem reduce_g_zero(std::span<const LocalFunction> locals_only, double mu);

}  // namespace locodl
