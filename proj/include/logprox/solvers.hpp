#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "logprox/kernels.hpp"
#include "logprox/optimality.hpp"
#include "logprox/trace.hpp"

namespace logprox {

/// How the sharing consensus step counts the copies of a coordinate.
enum class SharingConsensus {
  /// Average over the groups that contain the coordinate. Reproduces the
  /// vector-form iterates exactly.
  PerCoordinate,
  /// Average over all |G| columns of the d x |G| latent matrix, with the
  /// entries outside each group carried as pinned-to-zero copies.
  AllGroups,
};

struct SolveOptions {
  double rho = 1.0;
  std::optional<double> alpha;  // dual step, defaults to rho / 2
  int max_iter = 10000;
  double tol_opt = 1e-8;
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  int trace_every = 0;
  std::uint64_t seed = 0;
  Index unscaled_cap = 4096;
  SharingConsensus consensus = SharingConsensus::PerCoordinate;

  double dual_step() const { return alpha.value_or(0.5 * rho); }

  void validate(bool admm) const {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
    if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be positive");
    if (!(tol_opt > 0.0) || !(tol_primal > 0.0) || !(tol_dual > 0.0))
      throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
    if (trace_every < 0) throw Error(ErrorCode::InvalidArgument, "trace_every must be nonnegative");
    if (admm) {
      const double a = dual_step();
      if (!(a > 0.0) || !(a < rho))
        throw Error(ErrorCode::InvalidStep, "dual step alpha = " + std::to_string(a) +
                                                " must satisfy 0 < alpha < rho = " + std::to_string(rho));
    }
  }
};

enum class SolveStatus { Converged, MaxIter };

template <typename Scalar>
struct ProxResult {
  Vector<Scalar> beta;    // M x1
  Vector<Scalar> latent;  // stacked nu^(g), length n
  Vector<Scalar> x2;      // second ADMM block (equals latent for single-block solvers)
  Vector<Scalar> y;       // unscaled dual; M^T(Mx - b) for single-block solvers
  Scalar objective{};
  SolveStatus status = SolveStatus::MaxIter;
  int iterations = 0;
  Scalar primal_residual{};
  Scalar dual_residual{};
  ConvergenceTrace trace;

  /// nu^(g) embedded in R^d.
  Vector<Scalar> latent_column(const GroupSet& gs, Index g) const {
    Vector<Scalar> col = Vector<Scalar>::Zero(gs.dim());
    const auto& grp = gs.group(g);
    for (std::size_t k = 0; k < grp.size(); ++k) col[grp[k]] = latent[gs.offset(g) + static_cast<Index>(k)];
    return col;
  }

  /// d x |G| matrix whose columns are the latent vectors.
  Matrix<Scalar> latent_matrix(const GroupSet& gs) const {
    Matrix<Scalar> m(gs.dim(), gs.num_groups());
    for (Index g = 0; g < gs.num_groups(); ++g) m.col(g) = latent_column(gs, g);
    return m;
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Scalar>
void require_finite(const Vector<Scalar>& v, const char* solver, int iter) {
  if (!v.allFinite())
    throw Error(ErrorCode::NonFiniteIterate, std::string(solver) + ": non-finite iterate at iteration " +
                                                 std::to_string(iter));
}

/// Zero is optimal iff every group of M^T b thresholds to zero.
template <typename Scalar>
bool zero_is_optimal(const ProxInstance<Scalar>& inst) {
  const Vector<Scalar> mtb = inst.op.adjoint_apply(inst.b);
  const GroupSet& gs = inst.groups();
  for (Index g = 0; g < gs.num_groups(); ++g)
    if (mtb.segment(gs.offset(g), gs.size(g)).norm() > inst.threshold(g)) return false;
  return true;
}

template <typename Scalar>
ProxResult<Scalar> zero_result(const ProxInstance<Scalar>& inst, const SolveOptions& opts) {
  ProxResult<Scalar> r;
  const Index n = inst.stacked_dim();
  r.latent = Vector<Scalar>::Zero(n);
  r.x2 = Vector<Scalar>::Zero(n);
  r.y = -inst.op.adjoint_apply(inst.b);  // satisfies M^T(M x2 - b) - y = 0
  r.beta = Vector<Scalar>::Zero(inst.dim());
  r.objective = objective_f(r.latent, inst);
  r.status = SolveStatus::Converged;
  r.iterations = 0;
  if (opts.trace_every > 0)
    r.trace.push({0, 0.0, static_cast<double>(r.objective), 0.0, 0.0,
                  static_cast<double>(proxgrad_norm(r.latent, inst))});
  return r;
}

}  // namespace detail

/// Gauss-Seidel block coordinate descent over the latent groups. One iteration
/// is one sweep over all groups, in fixed order or (randomized) a fresh
/// seed-controlled permutation per sweep.
template <typename Scalar>
ProxResult<Scalar> prox_log_bcd(const ProxInstance<Scalar>& inst, const SolveOptions& opts, bool randomized = false) {
  opts.validate(false);
  if (detail::zero_is_optimal(inst)) return detail::zero_result(inst, opts);
  const auto t0 = detail::Clock::now();
  const GroupSet& gs = inst.groups();
  const Index n = inst.stacked_dim();

  Vector<Scalar> x = Vector<Scalar>::Zero(n);
  Vector<Scalar> beta = Vector<Scalar>::Zero(inst.dim());
  std::vector<Index> order(gs.num_groups());
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(opts.seed);

  ProxResult<Scalar> r;
  auto record = [&](int k, Scalar pg) {
    r.trace.push({k, detail::seconds_since(t0), static_cast<double>(objective_f(x, inst)), 0.0, 0.0,
                  static_cast<double>(pg)});
  };
  if (opts.trace_every > 0) record(0, proxgrad_norm(x, inst));

  int k = 0;
  while (k < opts.max_iter) {
    ++k;
    if (randomized) std::shuffle(order.begin(), order.end(), rng);
    for (Index g : order) {
      const auto& grp = gs.group(g);
      const Index off = gs.offset(g);
      Vector<Scalar> v(static_cast<Index>(grp.size()));
      for (std::size_t q = 0; q < grp.size(); ++q) {
        const Index p = off + static_cast<Index>(q);
        beta[grp[q]] -= x[p];
        v[static_cast<Index>(q)] = inst.b[grp[q]] - beta[grp[q]];
      }
      shrink_in_place(v, inst.threshold(g));
      for (std::size_t q = 0; q < grp.size(); ++q) {
        const Index p = off + static_cast<Index>(q);
        x[p] = v[static_cast<Index>(q)];
        beta[grp[q]] += x[p];
      }
    }
    detail::require_finite(x, "bcd", k);
    const Scalar pg = proxgrad_norm(x, inst);
    const bool done = pg <= Scalar(opts.tol_opt);
    if (opts.trace_every > 0 && (k % opts.trace_every == 0 || done || k == opts.max_iter)) record(k, pg);
    if (done) {
      r.status = SolveStatus::Converged;
      break;
    }
  }
  r.iterations = k;
  r.beta = inst.op.apply(x);
  r.x2 = x;
  r.y = inst.op.residual_gradient(x, inst.b);  // multiplier of x1 = x2 at a single-block point
  r.latent = std::move(x);
  r.objective = objective_f(r.latent, inst);
  return r;
}

/// ISTA (or FISTA when `accelerated`) on the stacked problem. The default step
/// is 1 / ||M||^2.
template <typename Scalar>
ProxResult<Scalar> prox_log_pgm(const ProxInstance<Scalar>& inst, const SolveOptions& opts, bool accelerated = false,
                                std::optional<Scalar> step = std::nullopt) {
  opts.validate(false);
  if (step && !(*step > Scalar(0))) throw Error(ErrorCode::InvalidStep, "pgm step must be positive");
  if (detail::zero_is_optimal(inst)) return detail::zero_result(inst, opts);
  const auto t0 = detail::Clock::now();
  const GroupSet& gs = inst.groups();
  const Index n = inst.stacked_dim();
  const Scalar s = step ? *step : Scalar(1) / operator_norm_sq(inst.op);

  Vector<Scalar> x = Vector<Scalar>::Zero(n);
  Vector<Scalar> x_prev = x;
  Vector<Scalar> z = x;  // extrapolated point (FISTA), equals x for ISTA
  Scalar t(1);

  ProxResult<Scalar> r;
  auto record = [&](int k, Scalar pg) {
    r.trace.push({k, detail::seconds_since(t0), static_cast<double>(objective_f(x, inst)), 0.0, 0.0,
                  static_cast<double>(pg)});
  };
  if (opts.trace_every > 0) record(0, proxgrad_norm(x, inst));

  int k = 0;
  while (k < opts.max_iter) {
    ++k;
    x_prev.swap(x);
    x = z - s * inst.op.residual_gradient(z, inst.b);
    for (Index g = 0; g < gs.num_groups(); ++g) {
      auto seg = x.segment(gs.offset(g), gs.size(g));
      shrink_in_place(seg, s * inst.threshold(g));
    }
    detail::require_finite(x, accelerated ? "fista" : "pgm", k);
    if (accelerated) {
      const Scalar t_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t)) / Scalar(2);
      z = x + ((t - Scalar(1)) / t_next) * (x - x_prev);
      t = t_next;
    } else {
      z = x;
    }
    const Scalar pg = proxgrad_norm(x, inst);
    const bool done = pg <= Scalar(opts.tol_opt);
    if (opts.trace_every > 0 && (k % opts.trace_every == 0 || done || k == opts.max_iter)) record(k, pg);
    if (done) {
      r.status = SolveStatus::Converged;
      break;
    }
  }
  r.iterations = k;
  r.beta = inst.op.apply(x);
  r.x2 = x;
  r.y = inst.op.residual_gradient(x, inst.b);  // multiplier of x1 = x2 at a single-block point
  r.latent = std::move(x);
  r.objective = objective_f(r.latent, inst);
  return r;
}

/// Unscaled two-block ADMM on the vector form. The x2 update solves with a
/// cached sparse Cholesky factor of M^T M + rho I, so n is capped.
template <typename Scalar>
class UnscaledAdmm {
 public:
  UnscaledAdmm(const ProxInstance<Scalar>& inst, const SolveOptions& opts)
      : inst_(&inst), rho_(Scalar(opts.rho)), alpha_(Scalar(opts.dual_step())) {
    opts.validate(true);
    const Index n = inst.stacked_dim();
    if (n > opts.unscaled_cap)
      throw Error(ErrorCode::CapExceeded, "unscaled ADMM: n = " + std::to_string(n) + " exceeds cap " +
                                              std::to_string(opts.unscaled_cap));
    // (M^T M)_{pq} = 1 when stacked positions p and q copy the same coordinate.
    std::vector<std::vector<Index>> copies(inst.dim());
    for (Index p = 0; p < n; ++p) copies[inst.op.coordinate(p)].push_back(p);
    std::vector<Eigen::Triplet<Scalar>> entries;
    for (const auto& c : copies)
      for (Index p : c)
        for (Index q : c) entries.emplace_back(p, q, p == q ? Scalar(1) + rho_ : Scalar(1));
    Eigen::SparseMatrix<Scalar> system(n, n);
    system.setFromTriplets(entries.begin(), entries.end());
    factor_.compute(system);
    if (factor_.info() != Eigen::Success)
      throw Error(ErrorCode::FactorizationFailure, "unscaled ADMM: Cholesky of M^T M + rho I failed");
    mtb_ = inst.op.adjoint_apply(inst.b);
    x1_ = Vector<Scalar>::Zero(n);
    x2_ = Vector<Scalar>::Zero(n);
    y_ = Vector<Scalar>::Zero(n);
  }

  void step() {
    const GroupSet& gs = inst_->groups();
    x1_ = x2_ - y_ / rho_;
    for (Index g = 0; g < gs.num_groups(); ++g) {
      auto seg = x1_.segment(gs.offset(g), gs.size(g));
      shrink_in_place(seg, inst_->threshold(g) / rho_);
    }
    Vector<Scalar> x2_new = factor_.solve(mtb_ + rho_ * x1_ + y_);
    dual_res_ = rho_ * (x2_new - x2_).norm();
    x2_.swap(x2_new);
    y_ += alpha_ * (x1_ - x2_);
    primal_res_ = (x1_ - x2_).norm();
    ++iter_;
  }

  const Vector<Scalar>& x1() const { return x1_; }
  const Vector<Scalar>& x2() const { return x2_; }
  const Vector<Scalar>& y() const { return y_; }
  Scalar primal_residual() const { return primal_res_; }
  Scalar dual_residual() const { return dual_res_; }
  int iteration() const { return iter_; }
  Scalar rho() const { return rho_; }

 private:
  const ProxInstance<Scalar>* inst_;
  Scalar rho_, alpha_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<Scalar>> factor_;
  Vector<Scalar> mtb_, x1_, x2_, y_;
  Scalar primal_res_{}, dual_res_{};
  int iter_ = 0;
};

/// Scaled-form ADMM with the sharing reduction: the coupled block collapses to
/// a d-dimensional consensus vector, so no n x n system is ever formed.
///
/// With `Anchor::Exact`, the quadratic data term is replaced by the constraint
/// sum of copies = b (its infinite-weight limit), which turns the iteration
/// into a solver for the LOG penalty value itself.
template <typename Scalar>
class SharingAdmm {
 public:
  enum class Anchor { Quadratic, Exact };

  SharingAdmm(const SumOperator<Scalar>& op, Vector<Scalar> b, Scalar lambda, const SolveOptions& opts,
              Anchor anchor = Anchor::Quadratic)
      : op_(&op),
        b_(std::move(b)),
        lambda_(lambda),
        rho_(Scalar(opts.rho)),
        alpha_(Scalar(opts.dual_step())),
        anchor_(anchor),
        consensus_(opts.consensus) {
    opts.validate(true);
    if (b_.size() != op.rows()) throw Error(ErrorCode::DimensionMismatch, "sharing ADMM: b has wrong length");
    const Index n = op.cols();
    const Index d = op.rows();
    const Index num_groups = op.groups().num_groups();
    shares_.resize(d);
    pinned_.resize(d);
    for (Index i = 0; i < d; ++i) {
      const Index c = op.copies(i);
      shares_[i] = consensus_ == SharingConsensus::AllGroups ? num_groups : c;
      pinned_[i] = shares_[i] - c;
    }
    x1_ = Vector<Scalar>::Zero(n);
    x2_ = Vector<Scalar>::Zero(n);
    u_ = Vector<Scalar>::Zero(n);
    xbar_ = Vector<Scalar>::Zero(d);
    u_pinned_ = Vector<Scalar>::Zero(d);
    x2_pinned_ = Vector<Scalar>::Zero(d);
  }
  SharingAdmm(const ProxInstance<Scalar>& inst, const SolveOptions& opts)
      : SharingAdmm(inst.op, inst.b, inst.lambda, opts) {}

  /// Replaces (b, lambda) and keeps the current iterates as a warm start.
  void set_data(Vector<Scalar> b, Scalar lambda) {
    if (b.size() != op_->rows()) throw Error(ErrorCode::DimensionMismatch, "sharing ADMM: b has wrong length");
    b_ = std::move(b);
    lambda_ = lambda;
  }

  void step() {
    const GroupSet& gs = op_->groups();
    const Index n = op_->cols();
    const Index d = op_->rows();

    // (i) per-group prox of the 2-norm; rows outside g stay zero implicitly.
    x1_ = x2_ - u_;
    for (Index g = 0; g < gs.num_groups(); ++g) {
      auto seg = x1_.segment(gs.offset(g), gs.size(g));
      shrink_in_place(seg, lambda_ * Scalar(gs.weight(g)) / rho_);
    }

    // (ii) consensus average per coordinate.
    Vector<Scalar> sum = Vector<Scalar>::Zero(d);
    for (Index p = 0; p < n; ++p) sum[op_->coordinate(p)] += x1_[p] + u_[p];
    Vector<Scalar> mean(d);
    for (Index i = 0; i < d; ++i) {
      const Scalar m = Scalar(shares_[i]);
      if (shares_[i] == 0) {
        mean[i] = Scalar(0);
        xbar_[i] = Scalar(0);
        continue;
      }
      sum[i] += Scalar(pinned_[i]) * u_pinned_[i];
      mean[i] = sum[i] / m;
      xbar_[i] = anchor_ == Anchor::Exact ? b_[i] / m : (b_[i] + rho_ * mean[i]) / (m + rho_);
    }

    // (iii) recover X2 column-wise, (iv) scaled dual step.
    Scalar primal_sq(0), dual_sq(0);
    for (Index p = 0; p < n; ++p) {
      const Index i = op_->coordinate(p);
      const Scalar x2_new = xbar_[i] + x1_[p] + u_[p] - mean[i];
      dual_sq += (x2_new - x2_[p]) * (x2_new - x2_[p]);
      x2_[p] = x2_new;
      const Scalar gap = x1_[p] - x2_new;
      primal_sq += gap * gap;
      u_[p] += (alpha_ / rho_) * gap;
    }
    for (Index i = 0; i < d; ++i) {
      if (pinned_[i] == 0) continue;
      const Scalar cnt = Scalar(pinned_[i]);
      const Scalar x2_new = xbar_[i] + u_pinned_[i] - mean[i];
      dual_sq += cnt * (x2_new - x2_pinned_[i]) * (x2_new - x2_pinned_[i]);
      x2_pinned_[i] = x2_new;
      primal_sq += cnt * x2_new * x2_new;
      u_pinned_[i] -= (alpha_ / rho_) * x2_new;
    }
    primal_res_ = std::sqrt(primal_sq);
    dual_res_ = rho_ * std::sqrt(dual_sq);
    ++iter_;
  }

  const Vector<Scalar>& x1() const { return x1_; }
  const Vector<Scalar>& x2() const { return x2_; }
  /// Scaled dual U, stacked by group.
  const Vector<Scalar>& u() const { return u_; }
  /// Unscaled dual y = rho U.
  Vector<Scalar> y() const { return rho_ * u_; }
  const Vector<Scalar>& consensus() const { return xbar_; }
  Vector<Scalar> beta() const { return op_->apply(x1_); }
  Scalar primal_residual() const { return primal_res_; }
  Scalar dual_residual() const { return dual_res_; }
  int iteration() const { return iter_; }
  Scalar rho() const { return rho_; }

 private:
  const SumOperator<Scalar>* op_;
  Vector<Scalar> b_;
  Scalar lambda_, rho_, alpha_;
  Anchor anchor_;
  SharingConsensus consensus_;
  std::vector<Index> shares_;  // copies averaged per coordinate
  std::vector<Index> pinned_;  // pinned-to-zero copies per coordinate (AllGroups only)
  Vector<Scalar> x1_, x2_, u_, xbar_;
  Vector<Scalar> u_pinned_, x2_pinned_;  // common value of the pinned entries per row
  Scalar primal_res_{}, dual_res_{};
  int iter_ = 0;
};

namespace detail {

template <typename Scalar, typename Admm>
ProxResult<Scalar> run_admm(Admm& admm, const ProxInstance<Scalar>& inst, const SolveOptions& opts,
                            const char* name) {
  const auto t0 = Clock::now();
  ProxResult<Scalar> r;
  auto record = [&](int k) {
    r.trace.push({k, seconds_since(t0), static_cast<double>(objective_f(admm.x1(), inst)),
                  static_cast<double>(admm.primal_residual()), static_cast<double>(admm.dual_residual()),
                  static_cast<double>(proxgrad_norm(admm.x1(), inst))});
  };
  if (opts.trace_every > 0) record(0);
  while (admm.iteration() < opts.max_iter) {
    admm.step();
    const int k = admm.iteration();
    require_finite<Scalar>(admm.x1(), name, k);
    const bool done =
        admm.primal_residual() <= Scalar(opts.tol_primal) && admm.dual_residual() <= Scalar(opts.tol_dual);
    if (opts.trace_every > 0 && (k % opts.trace_every == 0 || done || k == opts.max_iter)) record(k);
    if (done) {
      r.status = SolveStatus::Converged;
      break;
    }
  }
  r.iterations = admm.iteration();
  r.latent = admm.x1();
  r.x2 = admm.x2();
  r.y = admm.y();
  r.beta = inst.op.apply(r.latent);
  r.objective = objective_f(r.latent, inst);
  r.primal_residual = admm.primal_residual();
  r.dual_residual = admm.dual_residual();
  return r;
}

}  // namespace detail

template <typename Scalar>
ProxResult<Scalar> prox_log_admm_unscaled(const ProxInstance<Scalar>& inst, const SolveOptions& opts) {
  opts.validate(true);
  if (inst.stacked_dim() > opts.unscaled_cap)
    throw Error(ErrorCode::CapExceeded, "unscaled ADMM: n = " + std::to_string(inst.stacked_dim()) +
                                            " exceeds cap " + std::to_string(opts.unscaled_cap));
  if (detail::zero_is_optimal(inst)) return detail::zero_result(inst, opts);
  UnscaledAdmm<Scalar> admm(inst, opts);
  return detail::run_admm(admm, inst, opts, "admm");
}

template <typename Scalar>
ProxResult<Scalar> prox_log_admm_sharing(const ProxInstance<Scalar>& inst, const SolveOptions& opts) {
  opts.validate(true);
  if (detail::zero_is_optimal(inst)) return detail::zero_result(inst, opts);
  SharingAdmm<Scalar> admm(inst, opts);
  return detail::run_admm(admm, inst, opts, "sharing");
}

enum class ProxSolver { Bcd, Rbcd, Admm, Sharing, Pgm, Fista };

inline std::string_view to_string(ProxSolver s) {
  switch (s) {
    case ProxSolver::Bcd: return "bcd";
    case ProxSolver::Rbcd: return "rbcd";
    case ProxSolver::Admm: return "admm";
    case ProxSolver::Sharing: return "sharing";
    case ProxSolver::Pgm: return "pgm";
    case ProxSolver::Fista: return "fista";
  }
  return "?";
}

inline ProxSolver parse_solver(std::string_view name) {
  for (ProxSolver s : {ProxSolver::Bcd, ProxSolver::Rbcd, ProxSolver::Admm, ProxSolver::Sharing, ProxSolver::Pgm,
                       ProxSolver::Fista})
    if (to_string(s) == name) return s;
  throw Error(ErrorCode::InvalidArgument, "unknown solver '" + std::string(name) + "'");
}

template <typename Scalar>
ProxResult<Scalar> solve_prox(const ProxInstance<Scalar>& inst, ProxSolver solver, const SolveOptions& opts,
                              std::optional<Scalar> pgm_step = std::nullopt) {
  switch (solver) {
    case ProxSolver::Bcd: return prox_log_bcd(inst, opts, false);
    case ProxSolver::Rbcd: return prox_log_bcd(inst, opts, true);
    case ProxSolver::Admm: return prox_log_admm_unscaled(inst, opts);
    case ProxSolver::Sharing: return prox_log_admm_sharing(inst, opts);
    case ProxSolver::Pgm: return prox_log_pgm(inst, opts, false, pgm_step);
    case ProxSolver::Fista: return prox_log_pgm(inst, opts, true, pgm_step);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown solver");
}

}  // namespace logprox
