#include "logprox/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "logprox/diagnostics.hpp"
#include "logprox/io.hpp"

namespace logprox {

namespace {

constexpr double kRateGapFloor = 1e-12;

std::string eps_label(double eps) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.0e", eps);
  return buf;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return io::format_double(v);
}

}  // namespace

Topology parse_topology(const std::string& name) {
  if (name == "two_layer") return Topology::TwoLayer;
  if (name == "binary_tree") return Topology::BinaryTree;
  if (name == "root_two_paths") return Topology::RootTwoPaths;
  if (name == "random_dag") return Topology::RandomDag;
  throw Error(ErrorCode::InvalidArgument, "unknown topology '" + name + "'");
}

std::string to_string(Topology t) {
  switch (t) {
    case Topology::TwoLayer: return "two_layer";
    case Topology::BinaryTree: return "binary_tree";
    case Topology::RootTwoPaths: return "root_two_paths";
    case Topology::RandomDag: return "random_dag";
  }
  return "?";
}

Dag make_topology(const BenchmarkSpec& spec) {
  switch (spec.topology) {
    case Topology::TwoLayer: return two_layer_tree(spec.nodes > 0 ? spec.nodes : 101);
    case Topology::BinaryTree: return binary_tree(spec.depth);
    case Topology::RootTwoPaths: return root_two_paths(spec.nodes > 0 ? spec.nodes : 101);
    case Topology::RandomDag: return random_dag(spec.nodes > 0 ? spec.nodes : 8, spec.edge_prob, spec.seed);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown topology");
}

Eigen::VectorXd sample_b(std::uint64_t seed, int replication, Index dim) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication), 0x62u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd b(dim);
  for (Index i = 0; i < dim; ++i) b[i] = normal(rng);
  return b;
}

BenchReport run_prox_bench(const BenchmarkSpec& spec) {
  if (spec.reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be positive");
  if (spec.solvers.empty()) throw Error(ErrorCode::InvalidArgument, "no solvers requested");
  spec.opts.validate(false);

  BenchReport report{spec, make_topology(spec), {}, {}, {}, {}};
  report.groups = ancestor_groups(report.dag);
  const auto groups = std::make_shared<const GroupSet>(report.groups);
  const SumOperator<double> op(groups);

  SolveOptions ref_opts = spec.opts;
  ref_opts.tol_primal = ref_opts.tol_dual = ref_opts.tol_opt = spec.reference_tol;
  ref_opts.trace_every = 0;
  ref_opts.max_iter = std::max(ref_opts.max_iter, 200000);

  for (int rep = 0; rep < spec.reps; ++rep) {
    ProxInstance<double> inst(sample_b(spec.seed, rep, report.dag.dim()), spec.lambda, op);
    report.reference.push_back(inst.stacked_dim() <= ref_opts.unscaled_cap
                                   ? prox_log_admm_unscaled(inst, ref_opts)
                                   : prox_log_admm_sharing(inst, ref_opts));
    for (ProxSolver s : spec.solvers) {
      SolveOptions o = spec.opts;
      o.seed = spec.seed * 1000003u + static_cast<std::uint64_t>(rep);
      report.runs.push_back({s, rep, solve_prox(inst, s, o, spec.pgm_step)});
    }
    report.b.push_back(inst.b);
  }
  return report;
}

void write_summary_csv(std::ostream& os, const BenchReport& report) {
  os << "solver,reps,converged,iters_mean,objective_mean,max_rel_objective_gap";
  for (double eps : epsilon_grid()) os << ",iters_to_" << eps_label(eps);
  os << ",log_rate,r_squared,max_abs_beta_minus_b\n";

  for (ProxSolver s : report.spec.solvers) {
    int reps = 0, converged = 0;
    double iters = 0.0, objective = 0.0, max_rel = 0.0, max_dev = 0.0;
    std::vector<double> to_eps(epsilon_grid().size(), 0.0);
    std::vector<bool> reached(epsilon_grid().size(), true);
    double rate = 0.0, r2 = 0.0;
    int fits = 0;
    for (const auto& run : report.runs) {
      if (run.solver != s) continue;
      const auto& r = run.result;
      const double f_star = report.f_star(run.replication);
      ++reps;
      converged += r.status == SolveStatus::Converged;
      iters += r.iterations;
      objective += r.objective;
      max_rel = std::max(max_rel, std::abs(r.objective - f_star) / std::max(1.0, std::abs(f_star)));
      max_dev = std::max(
          max_dev, (r.beta - report.b[static_cast<std::size_t>(run.replication)]).lpNorm<Eigen::Infinity>());
      for (std::size_t e = 0; e < epsilon_grid().size(); ++e) {
        const auto k = iterations_to_gap(r.trace, f_star, epsilon_grid()[e]);
        if (k < 0)
          reached[e] = false;
        else
          to_eps[e] += static_cast<double>(k);
      }
      try {
        const RateFit fit = fit_linear_rate(r.trace, f_star, 0.5, kRateGapFloor);
        rate += fit.log_rate;
        r2 += fit.r_squared;
        ++fits;
      } catch (const Error&) {
      }
    }
    if (reps == 0) continue;
    os << to_string(s) << ',' << reps << ',' << converged << ',' << fmt(iters / reps) << ',' << fmt(objective / reps)
       << ',' << fmt(max_rel);
    for (std::size_t e = 0; e < epsilon_grid().size(); ++e)
      os << ',' << (reached[e] ? fmt(to_eps[e] / reps) : "inf");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    os << ',' << fmt(fits ? rate / fits : nan) << ',' << fmt(fits ? r2 / fits : nan) << ',' << fmt(max_dev) << '\n';
  }
}

void write_runs_csv(std::ostream& os, const BenchReport& report) {
  os << "solver,rep,status,iterations,objective,f_star,beta_inf_diff_vs_reference\n";
  for (const auto& run : report.runs) {
    const auto& r = run.result;
    const auto& ref = report.reference[static_cast<std::size_t>(run.replication)];
    os << to_string(run.solver) << ',' << run.replication << ','
       << (r.status == SolveStatus::Converged ? "converged" : "max_iter") << ',' << r.iterations << ','
       << fmt(r.objective) << ',' << fmt(ref.objective) << ','
       << fmt((r.beta - ref.beta).lpNorm<Eigen::Infinity>()) << '\n';
  }
}

void write_bench_artifacts(const BenchReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + (dir / name).string() + "'");
    return f;
  };
  {
    auto f = open("summary.csv");
    write_summary_csv(f, report);
  }
  {
    auto f = open("runs.csv");
    write_runs_csv(f, report);
  }
  for (const auto& run : report.runs) {
    auto f = open("trace_" + std::string(to_string(run.solver)) + "_rep" + std::to_string(run.replication) + ".csv");
    write_trace_csv(f, run.result.trace);
  }
}

}  // namespace logprox
