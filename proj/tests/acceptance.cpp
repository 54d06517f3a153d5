// End-to-end acceptance checks. Prints one PASS/FAIL line per check and exits
// nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "logprox/bench.hpp"
#include "logprox/diagnostics.hpp"
#include "logprox/io.hpp"
#include "logprox/learn.hpp"
#include "logprox/optimality.hpp"
#include "logprox/solvers.hpp"

using namespace logprox;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr int kReps = 10;

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int failures = 0;

void report(int id, const char* name, const Check& c, const std::string& summary) {
  if (c.pass)
    std::printf("PASS %2d %s: %s\n", id, name, summary.c_str());
  else
    std::printf("FAIL %2d %s: %s [%s]\n", id, name, c.detail.c_str(), summary.c_str());
  std::fflush(stdout);
  failures += !c.pass;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Study {
  std::string name;
  BenchmarkSpec spec;
  BenchReport report;
  bool large;  // d >= 101
};

BenchmarkSpec spec_for(Topology t) {
  BenchmarkSpec s;
  s.topology = t;
  s.seed = kSeed;
  s.reps = kReps;
  s.lambda = 0.5;
  if (t == Topology::RandomDag) s.nodes = 8;
  if (t == Topology::TwoLayer || t == Topology::RootTwoPaths) s.nodes = 101;
  s.depth = 7;
  return s;
}

ProxInstance<double> instance_of(const Study& s, int rep) {
  return ProxInstance<double>(s.report.b[static_cast<std::size_t>(rep)], s.spec.lambda,
                              SumOperator<double>(s.report.groups));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1 ----------------------------------------------------------------------------
Check cross_solver(const std::vector<Study>& studies, double seconds, std::string& summary) {
  Check c;
  double worst_obj = 0.0, worst_beta = 0.0;
  for (const auto& s : studies) {
    for (int rep = 0; rep < kReps; ++rep) {
      std::vector<const BenchRun*> runs;
      for (const auto& r : s.report.runs)
        if (r.replication == rep) runs.push_back(&r);
      for (const auto* a : runs)
        for (const auto* b : runs) {
          const double rel = std::abs(a->result.objective - b->result.objective) /
                             std::max(1.0, std::abs(b->result.objective));
          const double db = (a->result.beta - b->result.beta).lpNorm<Eigen::Infinity>();
          worst_obj = std::max(worst_obj, rel);
          worst_beta = std::max(worst_beta, db);
          if (rel > 1e-6 || db > 1e-5)
            c.require(false, s.name + " rep " + std::to_string(rep) + " " + std::string(to_string(a->solver)) +
                                 " vs " + std::string(to_string(b->solver)) + ": rel obj " + fmt(rel) + ", beta " +
                                 fmt(db));
        }
    }
  }
  c.require(seconds <= 120.0, "benchmark took " + fmt(seconds) + " s");
  summary = "max pairwise rel objective " + fmt(worst_obj) + ", max beta diff " + fmt(worst_beta) + ", " +
            fmt(seconds) + " s";
  return c;
}

// 2 ----------------------------------------------------------------------------
Check sharing_equals_unscaled(const std::vector<Study>& studies, std::string& summary) {
  Check c;
  double worst = 0.0;
  int instances = 0;
  const int iters = 300;
  for (const auto& s : studies) {
    for (int rep = 0; rep < kReps; ++rep) {
      const auto inst = instance_of(s, rep);
      if (inst.stacked_dim() > 4096) continue;
      SolveOptions o;
      o.rho = 1.0;
      o.alpha = 0.5;
      UnscaledAdmm<double> a(inst, o);
      SharingAdmm<double> b(inst, o);
      double dev = 0.0;
      for (int k = 0; k < iters; ++k) {
        a.step();
        b.step();
        dev = std::max({dev, (a.x1() - b.x1()).lpNorm<Eigen::Infinity>(), (a.x2() - b.x2()).lpNorm<Eigen::Infinity>(),
                        (a.y() - b.y()).lpNorm<Eigen::Infinity>()});
      }
      ++instances;
      worst = std::max(worst, dev);
      if (dev > 1e-10) c.require(false, s.name + " rep " + std::to_string(rep) + ": deviation " + fmt(dev));
    }
  }
  summary = std::to_string(instances) + " instances x " + std::to_string(iters) + " iterations, max deviation " +
            fmt(worst);
  return c;
}

// 3 ----------------------------------------------------------------------------
Check linear_rate(const std::vector<Study>& studies, std::string& summary) {
  Check c;
  double worst = 1.0;
  int below = 0, total = 0;
  for (const auto& s : studies)
    for (const auto& r : s.report.runs) {
      if (r.solver != ProxSolver::Sharing) continue;
      ++total;
      try {
        const RateFit fit = fit_linear_rate(r.result.trace, s.report.f_star(r.replication), 0.5, 1e-12);
        worst = std::min(worst, fit.r_squared);
        below += fit.r_squared < 0.95;
        if (fit.r_squared < 0.95)
          c.require(false, s.name + " rep " + std::to_string(r.replication) + ": R^2 " + fmt(fit.r_squared));
      } catch (const Error& e) {
        c.require(false, s.name + " rep " + std::to_string(r.replication) + ": " + e.what());
      }
    }
  summary = "min R^2 " + fmt(worst) + ", " + std::to_string(below) + " of " + std::to_string(total) +
            " sharing runs below 0.95";
  return c;
}

// 4 ----------------------------------------------------------------------------
template <typename Admm>
double max_lyapunov_increase(Admm& admm, int iters, const ProxResult<double>& ref, double rho, double alpha) {
  double prev = lyapunov_value<double>(admm.x1(), admm.x2(), admm.y(), ref.latent, ref.x2, ref.y, rho, alpha);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < iters; ++k) {
    admm.step();
    const double cur = lyapunov_value<double>(admm.x1(), admm.x2(), admm.y(), ref.latent, ref.x2, ref.y, rho, alpha);
    worst = std::max(worst, cur - prev);
    prev = cur;
  }
  return worst;
}

Check lyapunov(const std::vector<Study>& studies, std::string& summary) {
  Check c;
  double worst = -std::numeric_limits<double>::infinity();
  int runs = 0;
  for (const auto& s : studies)
    for (const auto& r : s.report.runs) {
      if (r.solver != ProxSolver::Admm && r.solver != ProxSolver::Sharing) continue;
      const auto inst = instance_of(s, r.replication);
      const auto& ref = s.report.reference[static_cast<std::size_t>(r.replication)];
      const SolveOptions& o = s.spec.opts;
      double inc;
      if (r.solver == ProxSolver::Admm) {
        UnscaledAdmm<double> admm(inst, o);
        inc = max_lyapunov_increase(admm, r.result.iterations, ref, o.rho, o.dual_step());
      } else {
        SharingAdmm<double> admm(inst, o);
        inc = max_lyapunov_increase(admm, r.result.iterations, ref, o.rho, o.dual_step());
      }
      ++runs;
      worst = std::max(worst, inc);
      if (inc > 1e-9)
        c.require(false, s.name + " rep " + std::to_string(r.replication) + " " +
                             std::string(to_string(r.solver)) + ": increase " + fmt(inc));
    }
  summary = std::to_string(runs) + " ADMM runs, largest one-step change " + fmt(worst);
  return c;
}

// 5 ----------------------------------------------------------------------------
Check kkt(const std::vector<Study>& studies, std::string& summary) {
  Check c;
  double worst_ratio = 0.0;
  int checked = 0, skipped = 0;
  for (const auto& s : studies)
    for (const auto& r : s.report.runs) {
      if (r.result.status != SolveStatus::Converged) {
        ++skipped;
        continue;
      }
      const auto inst = instance_of(s, r.replication);
      const SolveOptions& o = s.spec.opts;
      const auto res = kkt_residual<double>(r.result.latent, r.result.x2, r.result.y, inst, o.rho);
      const bool admm = r.solver == ProxSolver::Admm || r.solver == ProxSolver::Sharing;
      const double tol = admm ? std::max(o.tol_primal, o.tol_dual) : o.tol_opt;
      const double ratio = res.max() / tol;
      worst_ratio = std::max(worst_ratio, ratio);
      ++checked;
      if (ratio > 10.0)
        c.require(false, s.name + " rep " + std::to_string(r.replication) + " " +
                             std::string(to_string(r.solver)) + ": residual " + fmt(res.max()) + " (" + fmt(ratio) +
                             "x tol)");
    }
  summary = std::to_string(checked) + " converged runs (" + std::to_string(skipped) +
            " stopped at max_iter), worst residual " + fmt(worst_ratio) + "x tol";
  return c;
}

// 6 ----------------------------------------------------------------------------
Check ordering(const std::vector<Study>& studies, std::string& summary) {
  Check c;
  std::ostringstream sum;
  for (const auto& s : studies) {
    if (!s.large) continue;
    std::map<ProxSolver, std::vector<double>> iters;
    for (const auto& r : s.report.runs) {
      const auto k = iterations_to_gap(r.result.trace, s.report.f_star(r.replication), 1e-6);
      iters[r.solver].push_back(k < 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(k));
    }
    const double mine = median(iters[ProxSolver::Sharing]);
    sum << s.name << ": sharing " << mine;
    for (ProxSolver other : {ProxSolver::Bcd, ProxSolver::Pgm, ProxSolver::Fista}) {
      const double theirs = median(iters[other]);
      sum << ", " << to_string(other) << ' ' << theirs;
      if (mine > theirs)
        c.require(false, s.name + ": sharing median " + fmt(mine) + " > " + std::string(to_string(other)) + " " +
                             fmt(theirs));
    }
    sum << "; ";
  }
  summary = "median iterations to 1e-6 gap: " + sum.str();
  summary.resize(summary.size() - 2);
  return c;
}

// 7 ----------------------------------------------------------------------------
double prox_lambda_max(const Eigen::VectorXd& b, const GroupSet& gs) {
  double best = 0.0;
  for (Index g = 0; g < gs.num_groups(); ++g) {
    double sq = 0.0;
    for (Index i : gs.group(g)) sq += b[i] * b[i];
    best = std::max(best, std::sqrt(sq) / gs.weight(g));
  }
  return best;
}

Check prox_properties(const std::vector<Study>& studies, std::string& summary) {
  Check c;
  const std::vector<ProxSolver> all = {ProxSolver::Bcd,     ProxSolver::Rbcd, ProxSolver::Admm,
                                       ProxSolver::Sharing, ProxSolver::Pgm,  ProxSolver::Fista};
  SolveOptions o;
  o.tol_opt = o.tol_primal = o.tol_dual = 1e-10;
  o.max_iter = 200000;
  const double slack = 2.0 * o.tol_primal;

  std::mt19937_64 rng(kSeed + 7);
  std::normal_distribution<double> nd;
  auto draw = [&](Index d) {
    Eigen::VectorXd v(d);
    for (auto& x : v) x = nd(rng);
    return v;
  };
  int pairs = 0;
  double worst_ratio = 0.0;
  for (const auto& s : studies) {
    const SumOperator<double> op(s.report.groups);
    for (int k = 0; k < 25; ++k) {
      const Eigen::VectorXd b1 = draw(op.rows()), b2 = draw(op.rows());
      const auto p1 = prox_log_admm_sharing(ProxInstance<double>(b1, s.spec.lambda, op), o).beta;
      const auto p2 = prox_log_admm_sharing(ProxInstance<double>(b2, s.spec.lambda, op), o).beta;
      const double lhs = (p1 - p2).norm(), rhs = (b1 - b2).norm();
      worst_ratio = std::max(worst_ratio, lhs / rhs);
      ++pairs;
      if (lhs > rhs + slack) c.require(false, s.name + ": ||P b1 - P b2|| " + fmt(lhs) + " > ||b1 - b2|| " + fmt(rhs));
    }
  }

  double worst_ident = 0.0, worst_zero = 0.0;
  for (const auto& s : studies) {
    const SumOperator<double> op(s.report.groups);
    const Eigen::VectorXd b = s.report.b.front();
    const double lmax = prox_lambda_max(b, s.report.groups);
    for (ProxSolver solver : all) {
      const double ident =
          (solve_prox(ProxInstance<double>(b, 0.0, op), solver, o).beta - b).lpNorm<Eigen::Infinity>();
      worst_ident = std::max(worst_ident, ident);
      if (ident > 1e-8)
        c.require(false, s.name + " " + std::string(to_string(solver)) + ": lambda = 0 gives ||beta - b|| " +
                             fmt(ident));
      for (double f : {1.0, 1.5}) {
        const double z = solve_prox(ProxInstance<double>(b, f * lmax, op), solver, o).beta.lpNorm<Eigen::Infinity>();
        worst_zero = std::max(worst_zero, z);
        if (z > 1e-8)
          c.require(false, s.name + " " + std::string(to_string(solver)) + ": lambda >= lambda_max gives ||beta|| " +
                               fmt(z));
      }
    }
  }
  summary = std::to_string(pairs) + " pairs, max Lipschitz ratio " + fmt(worst_ratio) + "; identity error " +
            fmt(worst_ident) + "; zeroing error " + fmt(worst_zero);
  return c;
}

// 8 ----------------------------------------------------------------------------
Eigen::MatrixXd gaussian_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = nd(rng);
  return m;
}

// A response whose true coefficients live on one root-to-node ancestor set.
Eigen::VectorXd hierarchical_truth(const Dag& dag, Index leaf) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(dag.dim());
  const GroupSet groups = ancestor_groups(dag);
  for (Index i : groups.group(leaf)) beta[i] = (i % 2 ? 1.0 : -1.5);
  return beta;
}

Check hierarchy(const std::vector<Study>& studies, std::string& summary) {
  Check c;
  int prox_checked = 0, fit_checked = 0;
  for (const auto& s : studies) {
    if (s.spec.topology == Topology::RandomDag) continue;
    for (const auto& r : s.report.runs) {
      const auto rep = check_hierarchy_conformance(s.report.dag, r.result.beta, 1e-8);
      ++prox_checked;
      if (rep.count())
        c.require(false, s.name + " rep " + std::to_string(r.replication) + " " + std::string(to_string(r.solver)) +
                             ": " + std::to_string(rep.count()) + " violations");
    }
  }

  std::mt19937_64 rng(kSeed + 8);
  std::normal_distribution<double> nd;
  for (const auto& s : studies) {
    if (s.spec.topology == Topology::RandomDag) continue;
    const Dag& dag = s.report.dag;
    const Index d = dag.dim();
    const Eigen::MatrixXd a = gaussian_matrix(2 * d, d, rng);
    const Eigen::VectorXd truth = hierarchical_truth(dag, d / 3);
    Eigen::VectorXd y = a * truth;
    for (auto& v : y) v += 0.1 * nd(rng);
    const Eigen::VectorXd labels = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const LeastSquaresLoss<double> ls(a, y);
    const LogisticLoss<double> lg(a, labels);
    const GroupSet gs = s.report.groups;
    for (const SmoothLoss<double>* loss : {static_cast<const SmoothLoss<double>*>(&ls),
                                           static_cast<const SmoothLoss<double>*>(&lg)}) {
      const double lmax = lambda_max(*loss, gs);
      for (double frac : {0.3, 0.1}) {
        FitOptions fo;
        fo.accelerated = true;
        const auto fitres = fit(*loss, gs, frac * lmax, fo, SolveOptions{});
        const auto rep = check_hierarchy_conformance(dag, fitres.beta, 1e-8);
        ++fit_checked;
        if (rep.count())
          c.require(false, s.name + " fit at " + fmt(frac) + " lambda_max: " + std::to_string(rep.count()) +
                               " violations");
      }
    }
  }
  summary = "0 strong violations in " + std::to_string(prox_checked) + " prox outputs and " +
            std::to_string(fit_checked) + " fits on trees";
  return c;
}

// 9 ----------------------------------------------------------------------------
double fd_error(const SmoothLoss<double>& loss, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd g = loss.gradient(beta);
  Eigen::VectorXd fd(loss.dim());
  const double h = 1e-6;
  for (Index i = 0; i < loss.dim(); ++i) {
    Eigen::VectorXd p = beta, m = beta;
    p[i] += h;
    m[i] -= h;
    fd[i] = (loss.value(p) - loss.value(m)) / (2 * h);
  }
  return (fd - g).norm() / std::max(1.0, g.norm());
}

Check learner(std::string& summary) {
  Check c;
  std::mt19937_64 rng(kSeed + 9);
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd a = gaussian_matrix(80, 12, rng);
  Eigen::VectorXd y(80), labels(80);
  for (Index i = 0; i < 80; ++i) {
    y[i] = nd(rng);
    labels[i] = nd(rng) > 0 ? 1.0 : -1.0;
  }
  const LeastSquaresLoss<double> ls(a, y);
  const LogisticLoss<double> lg(a, labels);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd beta(12);
    for (auto& v : beta) v = 0.5 * nd(rng);
    for (const SmoothLoss<double>* loss : {static_cast<const SmoothLoss<double>*>(&ls),
                                           static_cast<const SmoothLoss<double>*>(&lg)}) {
      const double e = fd_error(*loss, beta);
      worst = std::max(worst, e);
      if (e > 1e-4) c.require(false, "finite-difference mismatch " + fmt(e));
    }
  }

  const std::filesystem::path dir = std::filesystem::path(LOGPROX_FIXTURE_DIR) / "chain20";
  const Dag dag = io::read_graph_file(dir / "graph.txt");
  const LeastSquaresLoss<double> loss(io::read_matrix_csv(dir / "X.csv"), io::read_vector_csv(dir / "y.csv"));
  const Eigen::VectorXd truth = io::read_vector_csv(dir / "beta_true.csv");
  const GroupSet gs = ancestor_groups(dag);
  const double lmax = lambda_max(loss, gs);
  std::string hit;
  for (double frac : {0.5, 0.2, 0.1, 0.05, 0.02, 0.01}) {
    const auto r = fit(loss, gs, frac * lmax, FitOptions{}, SolveOptions{});
    bool superset = true;
    for (Index i = 0; i < truth.size(); ++i)
      if (truth[i] != 0.0 && std::abs(r.beta[i]) <= 1e-8) superset = false;
    if (superset && check_hierarchy_conformance(dag, r.beta, 1e-8).count() == 0 && hit.empty())
      hit = fmt(frac) + " lambda_max (support " + std::to_string(r.support.size()) + ")";
  }
  c.require(!hit.empty(), "no swept lambda recovers the true support without violations");
  summary = "max FD error " + fmt(worst) + "; chain fixture recovered at " + hit;
  return c;
}

// 10 ---------------------------------------------------------------------------
Check determinism(const std::vector<Study>& studies, std::string& summary) {
  Check c;
  for (const auto& s : studies) {
    std::ostringstream first, second;
    write_summary_csv(first, s.report);
    write_summary_csv(second, run_prox_bench(s.spec));
    c.require(first.str() == second.str(), s.name + ": summary differs between runs");
  }
  summary = std::to_string(studies.size()) + " summaries byte-identical across repeated runs";
  return c;
}

}  // namespace

int main() {
  std::vector<Study> studies;
  const auto t0 = std::chrono::steady_clock::now();
  for (Topology t : {Topology::TwoLayer, Topology::BinaryTree, Topology::RootTwoPaths, Topology::RandomDag}) {
    const BenchmarkSpec spec = spec_for(t);
    BenchReport rep = run_prox_bench(spec);
    const bool large = rep.dag.dim() >= 101;
    studies.push_back({to_string(t) + "(d=" + std::to_string(rep.dag.dim()) + ")", spec, std::move(rep), large});
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string s;
  Check c;
  c = cross_solver(studies, seconds, s);
  report(1, "cross-solver agreement", c, s);
  c = sharing_equals_unscaled(studies, s);
  report(2, "sharing/unscaled trajectory match", c, s);
  c = linear_rate(studies, s);
  report(3, "linear rate fit", c, s);
  c = lyapunov(studies, s);
  report(4, "Lyapunov monotonicity", c, s);
  c = kkt(studies, s);
  report(5, "KKT certification", c, s);
  c = ordering(studies, s);
  report(6, "sharing iteration count vs bcd/pgm/fista", c, s);
  c = prox_properties(studies, s);
  report(7, "prox properties", c, s);
  c = hierarchy(studies, s);
  report(8, "hierarchy conformance", c, s);
  c = learner(s);
  report(9, "learner correctness", c, s);
  c = determinism(studies, s);
  report(10, "determinism", c, s);

  std::printf("%d of 10 checks failed\n", failures);
  return failures == 0 ? 0 : 1;
}
