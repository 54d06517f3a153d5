#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logprox/graph.hpp"
#include "logprox/kernels.hpp"
#include "logprox/penalty.hpp"
#include "logprox/solvers.hpp"
#include "logprox/trace.hpp"

namespace logprox {

/// Differentiable loss L : R^d -> R with Lipschitz gradient.
template <typename Scalar>
class SmoothLoss {
 public:
  virtual ~SmoothLoss() = default;
  virtual Index dim() const = 0;
  virtual Scalar value(const Vector<Scalar>& beta) const = 0;
  virtual Vector<Scalar> gradient(const Vector<Scalar>& beta) const = 0;
  virtual std::optional<Scalar> lipschitz_hint() const { return std::nullopt; }
};

/// Largest eigenvalue of A^T A, from the smaller of the two Gram matrices.
template <typename Scalar>
Scalar spectral_norm_sq(const Matrix<Scalar>& a) {
  if (a.size() == 0) return Scalar(0);
  const Matrix<Scalar> gram = a.rows() < a.cols() ? Matrix<Scalar>(a * a.transpose()) : Matrix<Scalar>(a.transpose() * a);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

/// 0.5 ||A beta - y||^2.
template <typename Scalar>
class LeastSquaresLoss final : public SmoothLoss<Scalar> {
 public:
  LeastSquaresLoss(Matrix<Scalar> a, Vector<Scalar> y) : a_(std::move(a)), y_(std::move(y)) {
    if (a_.rows() != y_.size())
      throw Error(ErrorCode::DimensionMismatch, "design has " + std::to_string(a_.rows()) + " rows, response has " +
                                                    std::to_string(y_.size()) + " entries");
    lipschitz_ = spectral_norm_sq(a_);
  }

  Index dim() const override { return a_.cols(); }
  Scalar value(const Vector<Scalar>& beta) const override { return Scalar(0.5) * (a_ * beta - y_).squaredNorm(); }
  Vector<Scalar> gradient(const Vector<Scalar>& beta) const override { return a_.transpose() * (a_ * beta - y_); }
  std::optional<Scalar> lipschitz_hint() const override { return lipschitz_; }

 private:
  Matrix<Scalar> a_;
  Vector<Scalar> y_;
  Scalar lipschitz_;
};

/// sum_i log(1 + exp(-y_i a_i^T beta)) with labels in {-1, +1}.
template <typename Scalar>
class LogisticLoss final : public SmoothLoss<Scalar> {
 public:
  LogisticLoss(Matrix<Scalar> a, Vector<Scalar> labels) : a_(std::move(a)), y_(std::move(labels)) {
    if (a_.rows() != y_.size())
      throw Error(ErrorCode::DimensionMismatch, "design has " + std::to_string(a_.rows()) + " rows, labels have " +
                                                    std::to_string(y_.size()) + " entries");
    for (Index i = 0; i < y_.size(); ++i)
      if (y_[i] != Scalar(1) && y_[i] != Scalar(-1))
        throw Error(ErrorCode::InvalidArgument, "logistic label at row " + std::to_string(i) + " is not -1 or +1");
    lipschitz_ = Scalar(0.25) * spectral_norm_sq(a_);
  }

  Index dim() const override { return a_.cols(); }

  Scalar value(const Vector<Scalar>& beta) const override {
    const Vector<Scalar> margin = y_.cwiseProduct(a_ * beta);
    Scalar total(0);
    for (Index i = 0; i < margin.size(); ++i) total += softplus(-margin[i]);
    return total;
  }

  Vector<Scalar> gradient(const Vector<Scalar>& beta) const override {
    const Vector<Scalar> margin = y_.cwiseProduct(a_ * beta);
    Vector<Scalar> w(margin.size());
    // d/dm log(1 + e^{-m}) = -1 / (1 + e^{m})
    for (Index i = 0; i < margin.size(); ++i) w[i] = -y_[i] * sigmoid(-margin[i]);
    return a_.transpose() * w;
  }

  std::optional<Scalar> lipschitz_hint() const override { return lipschitz_; }

 private:
  static Scalar softplus(Scalar t) {
    return t > Scalar(0) ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  }
  static Scalar sigmoid(Scalar t) {
    if (t >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-t));
    const Scalar e = std::exp(t);
    return e / (Scalar(1) + e);
  }

  Matrix<Scalar> a_;
  Vector<Scalar> y_;
  Scalar lipschitz_;
};

struct FitOptions {
  int max_iter = 2000;
  double tol = 1e-6;              // on the outer prox-gradient norm ||z - beta_next|| / step
  std::optional<double> step;     // defaults to 1 / Lipschitz
  double inner_tol_floor = 1e-10;
  double inner_tol_scale = 1e-3;  // inner tolerance at outer iteration k is max(floor, scale / k^2)
  int trace_every = 0;            // records L + lambda * Omega_LOG every this many outer iterations
  double support_threshold = 1e-8;
  bool accelerated = false;
};

template <typename Scalar>
struct FitResult {
  Vector<Scalar> beta;
  ConvergenceTrace outer_trace;
  std::int64_t inner_iters = 0;
  int outer_iters = 0;
  int inner_warnings = 0;  // inner solves that hit max_iter at the tolerance floor
  std::vector<Index> support;
  SolveStatus status = SolveStatus::MaxIter;
  Scalar objective{};
};

/// max_g ||(grad L(0))_g|| / w_g: the smallest lambda for which beta = 0 is optimal.
template <typename Scalar>
Scalar lambda_max(const SmoothLoss<Scalar>& loss, const GroupSet& groups) {
  const Vector<Scalar> g0 = loss.gradient(Vector<Scalar>::Zero(loss.dim()));
  if (!g0.allFinite()) throw Error(ErrorCode::NonFiniteInput, "lambda_max: gradient at zero is not finite");
  Scalar best(0);
  for (Index g = 0; g < groups.num_groups(); ++g) {
    Scalar sq(0);
    for (Index i : groups.group(g)) sq += g0[i] * g0[i];
    best = std::fmax(best, std::sqrt(sq) / Scalar(groups.weight(g)));
  }
  return best;
}

/// Proximal gradient (ISTA / FISTA) on L(beta) + lambda Omega_LOG(beta). Each
/// prox is an inexact sharing-ADMM solve warm-started from the previous one.
template <typename Scalar>
FitResult<Scalar> fit(const SmoothLoss<Scalar>& loss, const GroupSet& groups, Scalar lambda, const FitOptions& fopts,
                      const SolveOptions& inner_opts) {
  if (!(lambda >= Scalar(0))) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
  if (loss.dim() != groups.dim())
    throw Error(ErrorCode::DimensionMismatch, "loss has dimension " + std::to_string(loss.dim()) +
                                                  ", groups span " + std::to_string(groups.dim()));
  if (fopts.max_iter < 1 || !(fopts.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "invalid outer options");
  Scalar step;
  if (fopts.step) {
    step = Scalar(*fopts.step);
  } else {
    const auto lip = loss.lipschitz_hint();
    if (!lip) throw Error(ErrorCode::InvalidArgument, "loss has no Lipschitz hint; pass an explicit step");
    step = *lip > Scalar(0) ? Scalar(1) / *lip : Scalar(1);
  }
  if (!(step > Scalar(0))) throw Error(ErrorCode::InvalidStep, "outer step must be positive");

  const auto t0 = detail::Clock::now();
  const Index d = loss.dim();
  SumOperator<Scalar> op(groups);
  SolveOptions inner = inner_opts;
  inner.validate(true);
  SharingAdmm<Scalar> admm(op, Vector<Scalar>::Zero(d), step * lambda, inner);

  FitResult<Scalar> r;
  Vector<Scalar> beta = Vector<Scalar>::Zero(d);
  Vector<Scalar> z = beta;
  Scalar t(1);

  auto objective = [&](const Vector<Scalar>& b) {
    return loss.value(b) + log_penalty_value(b, op, lambda);
  };
  if (fopts.trace_every > 0)
    r.outer_trace.push({0, 0.0, static_cast<double>(objective(beta)), 0.0, 0.0, 0.0});

  int k = 0;
  while (k < fopts.max_iter) {
    ++k;
    const Vector<Scalar> v = z - step * loss.gradient(z);
    if (!v.allFinite())
      throw Error(ErrorCode::NonFiniteIterate, "fit: non-finite gradient step at iteration " + std::to_string(k));
    admm.set_data(v, step * lambda);
    const Scalar tol_k = std::fmax(Scalar(fopts.inner_tol_floor), Scalar(fopts.inner_tol_scale) / Scalar(k * k));
    bool inner_done = false;
    for (int it = 0; it < inner.max_iter; ++it) {
      admm.step();
      ++r.inner_iters;
      if (admm.primal_residual() <= tol_k && admm.dual_residual() <= tol_k) {
        inner_done = true;
        break;
      }
    }
    if (!inner_done && tol_k <= Scalar(fopts.inner_tol_floor)) ++r.inner_warnings;

    Vector<Scalar> next = admm.beta();
    const Scalar pg = (z - next).norm() / step;
    if (fopts.accelerated) {
      const Scalar t_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t)) / Scalar(2);
      z = next + ((t - Scalar(1)) / t_next) * (next - beta);
      t = t_next;
    } else {
      z = next;
    }
    beta = std::move(next);
    const bool done = pg <= Scalar(fopts.tol);
    if (fopts.trace_every > 0 && (k % fopts.trace_every == 0 || done || k == fopts.max_iter))
      r.outer_trace.push({k, detail::seconds_since(t0), static_cast<double>(objective(beta)), 0.0, 0.0,
                          static_cast<double>(pg)});
    if (done) {
      r.status = SolveStatus::Converged;
      break;
    }
  }
  r.outer_iters = k;
  r.objective = objective(beta);
  for (Index i = 0; i < d; ++i)
    if (std::abs(beta[i]) > Scalar(fopts.support_threshold)) r.support.push_back(i);
  r.beta = std::move(beta);
  return r;
}

template <typename Scalar>
FitResult<Scalar> fit(const SmoothLoss<Scalar>& loss, const Dag& dag, Scalar lambda, const FitOptions& fopts,
                      const SolveOptions& inner_opts) {
  return fit(loss, ancestor_groups(dag), lambda, fopts, inner_opts);
}

}  // namespace logprox
