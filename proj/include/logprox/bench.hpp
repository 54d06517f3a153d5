#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logprox/graph.hpp"
#include "logprox/solvers.hpp"

namespace logprox {

enum class Topology { TwoLayer, BinaryTree, RootTwoPaths, RandomDag };

Topology parse_topology(const std::string& name);
std::string to_string(Topology t);

/// One simulation study: a topology, lambda, solvers and replications. Node
/// count zero selects the study default (101 for the trees, 8 for the random DAG).
struct BenchmarkSpec {
  Topology topology = Topology::RandomDag;
  Index nodes = 0;
  int depth = 7;
  double edge_prob = 0.3;
  std::uint64_t seed = 1;
  int reps = 10;
  double lambda = 0.5;
  std::vector<ProxSolver> solvers = {ProxSolver::Bcd, ProxSolver::Rbcd, ProxSolver::Admm,
                                     ProxSolver::Sharing, ProxSolver::Pgm, ProxSolver::Fista};
  SolveOptions opts = default_options();
  std::optional<double> pgm_step;
  double reference_tol = 1e-12;

  static SolveOptions default_options() {
    SolveOptions o;
    o.max_iter = 200000;
    o.trace_every = 1;
    return o;
  }
};

Dag make_topology(const BenchmarkSpec& spec);

/// b ~ N(0, I) from a stream keyed by (seed, replication); every solver of a
/// replication sees the same vector.
Eigen::VectorXd sample_b(std::uint64_t seed, int replication, Index dim);

struct BenchRun {
  ProxSolver solver;
  int replication;
  ProxResult<double> result;
};

struct BenchReport {
  BenchmarkSpec spec;
  Dag dag;
  GroupSet groups;
  std::vector<Eigen::VectorXd> b;              // per replication
  std::vector<ProxResult<double>> reference;   // high-accuracy run per replication
  std::vector<BenchRun> runs;

  double f_star(int rep) const { return static_cast<double>(reference[static_cast<std::size_t>(rep)].objective); }
};

BenchReport run_prox_bench(const BenchmarkSpec& spec);

inline const std::vector<double>& epsilon_grid() {
  static const std::vector<double> grid = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  return grid;
}

/// Aggregate per solver. Contains no timing data, so it is reproducible byte for byte.
void write_summary_csv(std::ostream& os, const BenchReport& report);
/// One row per (solver, replication).
void write_runs_csv(std::ostream& os, const BenchReport& report);
/// summary.csv, runs.csv and trace_<solver>_rep<r>.csv under `dir`.
void write_bench_artifacts(const BenchReport& report, const std::filesystem::path& dir);

}  // namespace logprox
