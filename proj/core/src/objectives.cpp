#include "locodl/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "locodl/error.hpp"

namespace locodl {

namespace {

constexpr double kSoftplusThreshold = 30.0;
constexpr double kPowerTolerance = 1e-8;
constexpr int kPowerMaxIterations = 10'000;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_dim(const Vector& x, std::size_t dim, const char* what) {
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw InputError(std::string(what) + ": dimension mismatch (got " + std::to_string(x.size()) +
                     ", expected " + std::to_string(dim) + ")");
  }
}

// Symmetric eigenvalue range of a PSD matrix; used only for the quadratic test objectives.
std::pair<double, double> eigen_range(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

}  // namespace

void Shard::validate() const {
  if (features.rows() < 1) throw InputError("shard: needs at least one row");
  if (labels.size() != features.rows()) throw InputError("shard: label count differs from row count");
  for (Eigen::Index s = 0; s < labels.size(); ++s) {
    if (labels[s] != 1.0 && labels[s] != -1.0) {
      throw InputError("shard: label at row " + std::to_string(s) + " is not -1 or +1");
    }
  }
}

double softplus(double t) noexcept {
  if (t > kSoftplusThreshold) return t;
  if (t < -kSoftplusThreshold) return std::exp(t);
  return std::log1p(std::exp(t));
}

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logistic_loss(const Vector& x, const Shard& shard, double mu) {
  check_dim(x, shard.dim(), "logistic_loss");
  const Vector margins = shard.features * x;
  double sum = 0.0;
  for (Eigen::Index s = 0; s < margins.size(); ++s) sum += softplus(-shard.labels[s] * margins[s]);
  return sum / static_cast<double>(shard.rows()) + 0.5 * mu * x.squaredNorm();
}

namespace {

void logistic_gradient_into(const Vector& x, const Shard& shard, double mu, Vector& out) {
  check_dim(x, shard.dim(), "grad_logistic");
  Vector weights = shard.features * x;
  const double inv_m = 1.0 / static_cast<double>(shard.rows());
  for (Eigen::Index s = 0; s < weights.size(); ++s) {
    const double b = shard.labels[s];
    weights[s] = -b * sigmoid(-b * weights[s]) * inv_m;
  }
  out.noalias() = shard.features.transpose() * weights;
  out += mu * x;
}

}  // namespace

Vector grad_logistic(const Vector& x, const Shard& shard, double mu) {
  Vector out(x.size());
  logistic_gradient_into(x, shard, mu, out);
  return out;
}

double largest_gram_eigenvalue(const Matrix& features) {
  const Eigen::Index d = features.cols();
  if (d == 0 || features.rows() == 0 || features.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  // Deterministic start with every component nonzero so it is not orthogonal
  // to the top eigenvector of a nonnegative Gram matrix.
  Vector v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = 1.0 + 1e-3 * static_cast<double>(j % 7);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < kPowerMaxIterations; ++it) {
    Vector w = features.transpose() * (features * v);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= kPowerTolerance * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

double logistic_smoothness(const Shard& shard, double mu) {
  if (shard.rows() == 0) throw InputError("logistic_smoothness: empty shard");
  return largest_gram_eigenvalue(shard.features) / (4.0 * static_cast<double>(shard.rows())) + mu;
}

double regularization_for_curvature(double curvature, double kappa_target) {
  if (!(kappa_target > 1.0)) throw InputError("regularization_for_kappa: kappa must exceed 1");
  return curvature / (kappa_target - 1.0);
}

double regularization_for_kappa(const Shard& shard_union, double kappa_target) {
  return regularization_for_curvature(logistic_smoothness(shard_union, 0.0), kappa_target);
}

// --- LocalFunction ---------------------------------------------------------

LocalFunction::LocalFunction(Kind kind, std::size_t dim, double smoothness, double strong_convexity)
    : kind_(std::move(kind)), dim_(dim), smoothness_(smoothness), strong_convexity_(strong_convexity) {}

LocalFunction LocalFunction::logistic(std::shared_ptr<const Shard> shard, double mu) {
  if (!shard) throw InputError("logistic: null shard");
  shard->validate();
  if (mu < 0.0) throw InputError("logistic: mu must be nonnegative");
  const double l = logistic_smoothness(*shard, mu);
  const std::size_t d = shard->dim();
  return LocalFunction(Logistic{std::move(shard), mu}, d, l, mu);
}

LocalFunction LocalFunction::quadratic(Matrix a, Vector b, double mu) {
  if (a.rows() != a.cols()) throw InputError("quadratic: A must be square");
  if (b.size() == 0) b = Vector::Zero(a.rows());
  if (b.size() != a.rows()) throw InputError("quadratic: b and A sizes differ");
  if (mu < 0.0) throw InputError("quadratic: mu must be nonnegative");
  if (!a.isApprox(a.transpose(), 1e-12)) throw InputError("quadratic: A must be symmetric");
  auto [lo, hi] = eigen_range(a);
  if (lo < -1e-10 * std::max(1.0, std::abs(hi))) throw InputError("quadratic: A must be PSD");
  lo = std::max(lo, 0.0);
  const std::size_t d = static_cast<std::size_t>(a.rows());
  return LocalFunction(Quadratic{std::move(a), std::move(b), mu}, d, hi + mu, lo + mu);
}

LocalFunction LocalFunction::ridge(std::size_t dim, double mu) {
  if (mu < 0.0) throw InputError("ridge: mu must be nonnegative");
  return LocalFunction(Quadratic{Matrix(), Vector(), mu}, dim, mu, mu);
}

LocalFunction LocalFunction::shifted(LocalFunction base, double removed_curvature) {
  if (removed_curvature > base.strong_convexity()) {
    throw InputError("shifted: removing more curvature than the base function has");
  }
  const std::size_t d = base.dim();
  const double l = base.smoothness() - removed_curvature;
  const double mu = base.strong_convexity() - removed_curvature;
  return LocalFunction(Shifted{std::make_shared<const LocalFunction>(std::move(base)), removed_curvature}, d,
                       l, mu);
}

bool LocalFunction::is_zero() const noexcept {
  const auto* q = std::get_if<Quadratic>(&kind_);
  return q != nullptr && q->a.size() == 0 && q->b.size() == 0 && q->mu == 0.0;
}

double LocalFunction::value(const Vector& x) const {
  check_dim(x, dim_, "LocalFunction::value");
  return std::visit(Overloaded{
                        [&](const Logistic& f) { return logistic_loss(x, *f.shard, f.mu); },
                        [&](const Quadratic& f) {
                          double v = 0.5 * f.mu * x.squaredNorm();
                          if (f.a.size() != 0) v += 0.5 * x.dot(f.a * x);
                          if (f.b.size() != 0) v -= f.b.dot(x);
                          return v;
                        },
                        [&](const Shifted& f) {
                          return f.base->value(x) - 0.5 * f.removed_curvature * x.squaredNorm();
                        },
                    },
                    kind_);
}

void LocalFunction::gradient_into(const Vector& x, Vector& out) const {
  check_dim(x, dim_, "LocalFunction::gradient");
  std::visit(Overloaded{
                 [&](const Logistic& f) { logistic_gradient_into(x, *f.shard, f.mu, out); },
                 [&](const Quadratic& f) {
                   out = f.mu * x;
                   if (f.a.size() != 0) out.noalias() += f.a * x;
                   if (f.b.size() != 0) out -= f.b;
                 },
                 [&](const Shifted& f) {
                   f.base->gradient_into(x, out);
                   out -= f.removed_curvature * x;
                 },
             },
             kind_);
}

Vector LocalFunction::gradient(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(dim_));
  gradient_into(x, out);
  return out;
}

Matrix LocalFunction::hessian(const Vector& x) const {
  check_dim(x, dim_, "LocalFunction::hessian");
  const auto d = static_cast<Eigen::Index>(dim_);
  return std::visit(Overloaded{
                        [&](const Logistic& f) -> Matrix {
                          const Shard& sh = *f.shard;
                          const Vector margins = sh.features * x;
                          Vector curv(margins.size());
                          for (Eigen::Index s = 0; s < margins.size(); ++s) {
                            const double sg = sigmoid(margins[s]);
                            curv[s] = sg * (1.0 - sg) / static_cast<double>(sh.rows());
                          }
                          Matrix h = sh.features.transpose() * curv.asDiagonal() * sh.features;
                          h.diagonal().array() += f.mu;
                          return h;
                        },
                        [&](const Quadratic& f) -> Matrix {
                          Matrix h = f.a.size() != 0 ? f.a : Matrix::Zero(d, d);
                          h.diagonal().array() += f.mu;
                          return h;
                        },
                        [&](const Shifted& f) -> Matrix {
                          Matrix h = f.base->hessian(x);
                          h.diagonal().array() -= f.removed_curvature;
                          return h;
                        },
                    },
                    kind_);
}

// --- Problem ---------------------------------------------------------------

Problem::Problem(std::vector<LocalFunction> locals, LocalFunction shared)
    : locals_(std::move(locals)), shared_(std::move(shared)), dim_(shared_.dim()) {
  if (locals_.empty()) throw InputError("problem: needs at least one local function");
  smoothness_ = 0.0;
  strong_convexity_ = std::numeric_limits<double>::infinity();
  for (const auto& f : locals_) {
    if (f.dim() != dim_) throw InputError("problem: local function dimension differs from shared");
    smoothness_ = std::max(smoothness_, f.smoothness());
    strong_convexity_ = std::min(strong_convexity_, f.strong_convexity());
  }
  if (!shared_.is_zero()) {
    smoothness_ = std::max(smoothness_, shared_.smoothness());
    strong_convexity_ = std::min(strong_convexity_, shared_.strong_convexity());
  }
}

double Problem::objective(const Vector& x) const {
  double sum = 0.0;
  for (const auto& f : locals_) sum += f.value(x);
  return sum / static_cast<double>(locals_.size()) + shared_.value(x);
}

Vector Problem::gradient(const Vector& x) const {
  Vector total = Vector::Zero(static_cast<Eigen::Index>(dim_));
  Vector buf(static_cast<Eigen::Index>(dim_));
  for (const auto& f : locals_) {
    f.gradient_into(x, buf);
    total += buf;
  }
  total /= static_cast<double>(locals_.size());
  shared_.gradient_into(x, buf);
  return total + buf;
}

Matrix Problem::hessian(const Vector& x) const {
  Matrix total = Matrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  for (const auto& f : locals_) total += f.hessian(x);
  total /= static_cast<double>(locals_.size());
  return total + shared_.hessian(x);
}

Problem reduce_g_zero(std::span<const LocalFunction> locals_only, double mu) {
  if (!(mu > 0.0)) throw InputError("reduce_g_zero: mu must be positive");
  if (locals_only.empty()) throw InputError("reduce_g_zero: no local functions");
  std::vector<LocalFunction> reduced;
  reduced.reserve(locals_only.size());
  for (const auto& f : locals_only) {
    if (f.strong_convexity() < mu * (1.0 - 1e-12)) {
      throw InputError("reduce_g_zero: a local function is less than mu-strongly convex");
    }
    reduced.push_back(LocalFunction::shifted(f, 0.5 * mu));
  }
  const std::size_t d = locals_only.front().dim();
  return Problem(std::move(reduced), LocalFunction::ridge(d, 0.5 * mu));
}

}  // namespace locodl
