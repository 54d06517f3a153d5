#pragma once

#include <limits>
#include <memory>

#include "logprox/kernels.hpp"
#include "logprox/solvers.hpp"

namespace logprox {

struct PenaltyOptions {
  double tol = 1e-10;
  int max_iter = 200000;
  double rho = 1.0;
  double alpha = 0.9;
};

/// lambda * Omega_LOG(beta): the cheapest weighted sum of group norms over all
/// latent decompositions of beta. Solved by the sharing iteration with the data
/// term replaced by the hard constraint sum_g nu^(g) = beta, on beta / ||beta||
/// (the penalty is positively homogeneous). Returns +inf when beta has support
/// outside the union of the groups.
template <typename Scalar>
Scalar log_penalty_value(const Vector<Scalar>& beta, const SumOperator<Scalar>& op, Scalar lambda,
                         const PenaltyOptions& popts = {}) {
  if (beta.size() != op.rows())
    throw Error(ErrorCode::DimensionMismatch, "log_penalty_value: beta has length " + std::to_string(beta.size()));
  if (!beta.allFinite()) throw Error(ErrorCode::NonFiniteInput, "log_penalty_value: beta is not finite");
  for (Index i = 0; i < beta.size(); ++i)
    if (beta[i] != Scalar(0) && op.copies(i) == 0) return std::numeric_limits<Scalar>::infinity();
  const Scalar scale = beta.norm();
  if (scale == Scalar(0) || lambda == Scalar(0)) return Scalar(0);

  SolveOptions opts;
  opts.rho = popts.rho;
  opts.alpha = popts.alpha;
  SharingAdmm<Scalar> admm(op, beta / scale, Scalar(1), opts, SharingAdmm<Scalar>::Anchor::Exact);
  for (int k = 0; k < popts.max_iter; ++k) {
    admm.step();
    if (admm.primal_residual() <= Scalar(popts.tol) && admm.dual_residual() <= Scalar(popts.tol)) break;
  }
  // x2 satisfies the constraint exactly; x1 is within the residual of it.
  return lambda * scale * latent_penalty(admm.x2(), op.groups(), Scalar(1));
}

template <typename Scalar>
Scalar log_penalty_value(const Vector<Scalar>& beta, const GroupSet& groups, Scalar lambda,
                         const PenaltyOptions& popts = {}) {
  return log_penalty_value(beta, SumOperator<Scalar>(groups), lambda, popts);
}

/// As log_penalty_value, but throws Unsupported instead of returning +inf.
template <typename Scalar>
Scalar log_penalty_value_checked(const Vector<Scalar>& beta, const GroupSet& groups, Scalar lambda,
                                 const PenaltyOptions& popts = {}) {
  const Scalar v = log_penalty_value(beta, groups, lambda, popts);
  if (std::isinf(static_cast<double>(v)))
    throw Error(ErrorCode::Unsupported, "beta is nonzero outside the union of the groups");
  return v;
}

}  // namespace logprox
