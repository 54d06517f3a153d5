#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logprox/error.hpp"
#include "logprox/graph.hpp"

namespace logprox {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// The binary scatter/sum operator M : R^n -> R^d with Mx = sum of the latent
/// copies of every coordinate. Never stored densely; `dense()` exists for tests.
template <typename Scalar>
class SumOperator {
 public:
  static constexpr Index kDenseLimit = 512;

  explicit SumOperator(std::shared_ptr<const GroupSet> groups) : groups_(std::move(groups)) {
    const Index n = groups_->stacked_dim();
    coord_.resize(n);
    counts_.assign(groups_->dim(), 0);
    for (Index g = 0; g < groups_->num_groups(); ++g) {
      const auto& grp = groups_->group(g);
      for (std::size_t k = 0; k < grp.size(); ++k) {
        coord_[groups_->offset(g) + static_cast<Index>(k)] = grp[k];
        ++counts_[grp[k]];
      }
    }
  }
  explicit SumOperator(GroupSet groups) : SumOperator(std::make_shared<const GroupSet>(std::move(groups))) {}

  Index rows() const { return groups_->dim(); }
  Index cols() const { return groups_->stacked_dim(); }
  const GroupSet& groups() const { return *groups_; }
  std::shared_ptr<const GroupSet> groups_ptr() const { return groups_; }

  /// Coordinate that stacked position p is a copy of.
  Index coordinate(Index p) const { return coord_[p]; }
  /// Number of groups containing coordinate i (the diagonal of M M^T).
  Index copies(Index i) const { return counts_[i]; }

  template <typename Derived>
  Vector<Scalar> apply(const Eigen::MatrixBase<Derived>& x) const {
    check_size(x.size(), cols(), "apply");
    Vector<Scalar> out = Vector<Scalar>::Zero(rows());
    for (Index p = 0; p < cols(); ++p) out[coord_[p]] += x[p];
    return out;
  }

  template <typename Derived>
  Vector<Scalar> adjoint_apply(const Eigen::MatrixBase<Derived>& y) const {
    check_size(y.size(), rows(), "adjoint_apply");
    Vector<Scalar> out(cols());
    for (Index p = 0; p < cols(); ++p) out[p] = y[coord_[p]];
    return out;
  }

  /// M^T (M x - b), the gradient of the smooth part of the prox objective.
  template <typename Derived, typename DerivedB>
  Vector<Scalar> residual_gradient(const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<DerivedB>& b) const {
    return adjoint_apply(apply(x) - b);
  }

  Matrix<Scalar> dense() const {
    if (cols() > kDenseLimit)
      throw Error(ErrorCode::CapExceeded, "dense M limited to n <= " + std::to_string(kDenseLimit));
    Matrix<Scalar> m = Matrix<Scalar>::Zero(rows(), cols());
    for (Index p = 0; p < cols(); ++p) m(coord_[p], p) = Scalar(1);
    return m;
  }

 private:
  static void check_size(Index got, Index want, const char* what) {
    if (got != want)
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": length " + std::to_string(got) +
                                                    ", expected " + std::to_string(want));
  }

  std::shared_ptr<const GroupSet> groups_;
  std::vector<Index> coord_;
  std::vector<Index> counts_;
};

/// Data of one prox evaluation: argmin_beta lambda * Omega_LOG(beta) + 0.5 ||beta - b||^2.
template <typename Scalar>
struct ProxInstance {
  Vector<Scalar> b;
  Scalar lambda;
  SumOperator<Scalar> op;

  ProxInstance(Vector<Scalar> b_, Scalar lambda_, SumOperator<Scalar> op_)
      : b(std::move(b_)), lambda(lambda_), op(std::move(op_)) {
    if (!(lambda >= Scalar(0)) || !std::isfinite(static_cast<double>(lambda)))
      throw Error(ErrorCode::InvalidArgument, "lambda must be finite and nonnegative");
    if (b.size() != op.rows())
      throw Error(ErrorCode::DimensionMismatch, "b has length " + std::to_string(b.size()) +
                                                    ", groups span dimension " + std::to_string(op.rows()));
    if (!b.allFinite()) throw Error(ErrorCode::NonFiniteInput, "b has non-finite entries");
  }
  ProxInstance(Vector<Scalar> b_, Scalar lambda_, GroupSet groups)
      : ProxInstance(std::move(b_), lambda_, SumOperator<Scalar>(std::move(groups))) {}

  const GroupSet& groups() const { return op.groups(); }
  Index dim() const { return op.rows(); }
  Index stacked_dim() const { return op.cols(); }
  /// Per-group threshold lambda * w_g.
  Scalar threshold(Index g) const { return lambda * Scalar(groups().weight(g)); }
};

/// prox of t||.||_2: zero when ||v|| <= t, else (1 - t/||v||) v.
template <typename Derived>
Vector<typename Derived::Scalar> group_soft_threshold(const Eigen::MatrixBase<Derived>& v,
                                                      typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  if (!v.allFinite() || !std::isfinite(static_cast<double>(t)))
    throw Error(ErrorCode::NonFiniteInput, "group_soft_threshold input is not finite");
  if (t < Scalar(0)) throw Error(ErrorCode::InvalidArgument, "threshold must be nonnegative");
  const Scalar norm = v.norm();
  if (norm <= t) return Vector<Scalar>::Zero(v.size());
  return (Scalar(1) - t / norm) * v;
}

/// In-place variant used on segments of stacked vectors; skips the finiteness
/// check (solvers validate iterates once per sweep).
template <typename Derived>
void shrink_in_place(Eigen::MatrixBase<Derived>& v, typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = v.norm();
  if (norm <= t)
    v.setZero();
  else
    v *= Scalar(1) - t / norm;
}

/// Separable part lambda * sum_g w_g ||x_{j(g)}||.
template <typename Scalar, typename Derived>
Scalar latent_penalty(const Eigen::MatrixBase<Derived>& x, const GroupSet& groups, Scalar lambda) {
  Scalar total(0);
  for (Index g = 0; g < groups.num_groups(); ++g)
    total += Scalar(groups.weight(g)) * x.segment(groups.offset(g), groups.size(g)).norm();
  return lambda * total;
}

/// f(x) = lambda sum_g w_g ||x_{j(g)}|| + 0.5 ||Mx - b||^2 over the stacked latent vector.
template <typename Scalar, typename Derived>
Scalar objective_f(const Eigen::MatrixBase<Derived>& x, const ProxInstance<Scalar>& inst) {
  if (x.size() != inst.stacked_dim())
    throw Error(ErrorCode::DimensionMismatch, "objective_f: x has length " + std::to_string(x.size()) +
                                                  ", expected " + std::to_string(inst.stacked_dim()));
  return latent_penalty(x, inst.groups(), inst.lambda) + Scalar(0.5) * (inst.op.apply(x) - inst.b).squaredNorm();
}

/// lambda * sum_g w_g ||beta_g||_2 (overlapping group lasso, l2 flavour).
template <typename Derived>
typename Derived::Scalar gl_penalty_value(const Eigen::MatrixBase<Derived>& beta, const GroupSet& groups,
                                          typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  if (beta.size() != groups.dim())
    throw Error(ErrorCode::DimensionMismatch, "gl_penalty_value: beta has length " + std::to_string(beta.size()));
  Scalar total(0);
  for (Index g = 0; g < groups.num_groups(); ++g) {
    Scalar sq(0);
    for (Index i : groups.group(g)) sq += beta[i] * beta[i];
    total += Scalar(groups.weight(g)) * std::sqrt(sq);
  }
  return lambda * total;
}

/// ||M||_2^2 = lambda_max(M^T M) by power iteration from the all-ones vector.
template <typename Scalar>
Scalar operator_norm_sq(const SumOperator<Scalar>& op, Scalar tol = Scalar(1e-10), int max_iter = 100000) {
  if (!(tol > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "operator_norm_sq: tol must be positive");
  Vector<Scalar> v = Vector<Scalar>::Ones(op.cols());
  v.normalize();
  Scalar estimate(0);
  for (int it = 0; it < max_iter; ++it) {
    // M^T M v = M^T (M v); ||M v||^2 is the Rayleigh quotient.
    const Vector<Scalar> mv = op.apply(v);
    const Scalar next = mv.squaredNorm();
    Vector<Scalar> w = op.adjoint_apply(mv);
    const Scalar wn = w.norm();
    if (wn == Scalar(0)) return Scalar(0);
    v = w / wn;
    if (it > 0 && std::abs(next - estimate) <= tol * std::abs(next)) return next;
    estimate = next;
  }
  throw Error(ErrorCode::NoConvergence, "operator_norm_sq: power iteration did not converge");
}

}  // namespace logprox
