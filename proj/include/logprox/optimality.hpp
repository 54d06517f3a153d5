#pragma once

#include <cmath>
#include <string>

#include "logprox/kernels.hpp"

namespace logprox {

/// Norm of the unit-step proximal gradient map x - prox_h(x - M^T(Mx - b)),
/// h the separable group-norm term. Zero exactly at minimizers of f.
template <typename Scalar, typename Derived>
Scalar proxgrad_norm(const Eigen::MatrixBase<Derived>& x, const ProxInstance<Scalar>& inst) {
  if (x.size() != inst.stacked_dim())
    throw Error(ErrorCode::DimensionMismatch, "proxgrad_norm: x has length " + std::to_string(x.size()) +
                                                  ", expected " + std::to_string(inst.stacked_dim()));
  Vector<Scalar> z = x - inst.op.residual_gradient(x, inst.b);
  const GroupSet& gs = inst.groups();
  for (Index g = 0; g < gs.num_groups(); ++g) {
    auto seg = z.segment(gs.offset(g), gs.size(g));
    shrink_in_place(seg, inst.threshold(g));
  }
  return (x - z).norm();
}

struct KktResidual {
  double stationarity2 = 0.0;  // ||M^T(M x2 - b) + rho (x2 - x1) - y||
  double stationarity1 = 0.0;  // distance of -(y + rho(x1 - x2)) to lambda * subdifferential, l2 over groups
  double feasibility = 0.0;    // ||x1 - x2||

  double max() const { return std::fmax(stationarity2, std::fmax(stationarity1, feasibility)); }
};

/// Residuals of the KKT system of the split problem at (x1, x2, y). The conic
/// multipliers are eliminated in closed form per group.
template <typename Scalar>
KktResidual kkt_residual(const Vector<Scalar>& x1, const Vector<Scalar>& x2, const Vector<Scalar>& y,
                         const ProxInstance<Scalar>& inst, Scalar rho) {
  const Index n = inst.stacked_dim();
  if (x1.size() != n || x2.size() != n || y.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "kkt_residual: iterates must have length " + std::to_string(n));
  KktResidual r;
  const Vector<Scalar> gap = x1 - x2;
  r.feasibility = static_cast<double>(gap.norm());
  r.stationarity2 = static_cast<double>((inst.op.residual_gradient(x2, inst.b) - rho * gap - y).norm());

  const GroupSet& gs = inst.groups();
  const Vector<Scalar> dual = y + rho * gap;
  Scalar acc(0);
  for (Index g = 0; g < gs.num_groups(); ++g) {
    const auto xg = x1.segment(gs.offset(g), gs.size(g));
    const auto dg = dual.segment(gs.offset(g), gs.size(g));
    const Scalar t = inst.threshold(g);
    const Scalar xn = xg.norm();
    Scalar res;
    if (xn > Scalar(0))
      res = (dg + t * xg / xn).norm();
    else
      res = std::fmax(Scalar(0), dg.norm() - t);
    acc += res * res;
  }
  r.stationarity1 = static_cast<double>(std::sqrt(acc));
  return r;
}

/// ||y - y*||^2 + alpha rho ||x2 - x2*||^2 + alpha (rho - alpha) ||(x1 - x2) - (x1* - x2*)||^2,
/// non-increasing along unscaled ADMM iterates for 0 < alpha < rho.
template <typename Scalar>
Scalar lyapunov_value(const Vector<Scalar>& x1, const Vector<Scalar>& x2, const Vector<Scalar>& y,
                      const Vector<Scalar>& x1_ref, const Vector<Scalar>& x2_ref, const Vector<Scalar>& y_ref,
                      Scalar rho, Scalar alpha) {
  return (y - y_ref).squaredNorm() + alpha * rho * (x2 - x2_ref).squaredNorm() +
         alpha * (rho - alpha) * ((x1 - x2) - (x1_ref - x2_ref)).squaredNorm();
}

}  // namespace logprox
