#include <doctest.h>

#include <sstream>

#include "logprox/bench.hpp"

using namespace logprox;

TEST_CASE("benchmark topologies have the study dimensions") {
  BenchmarkSpec s;
  s.topology = Topology::TwoLayer;
  CHECK(make_topology(s).dim() == 101);
  s.topology = Topology::BinaryTree;
  CHECK(make_topology(s).dim() == 127);
  s.topology = Topology::RootTwoPaths;
  CHECK(make_topology(s).dim() == 101);
  s.topology = Topology::RandomDag;
  CHECK(make_topology(s).dim() == 8);
  s.nodes = 12;
  CHECK(make_topology(s).dim() == 12);

  for (const char* name : {"two_layer", "binary_tree", "root_two_paths", "random_dag"})
    CHECK(to_string(parse_topology(name)) == name);
  CHECK_THROWS_AS(parse_topology("star"), Error);
}

TEST_CASE("replication streams") {
  const Eigen::VectorXd a = sample_b(7, 0, 50);
  CHECK(a == sample_b(7, 0, 50));
  CHECK(a != sample_b(7, 1, 50));
  CHECK(a != sample_b(8, 0, 50));
  CHECK(std::abs(a.mean()) < 0.5);
}

TEST_CASE("report structure and summary columns") {
  BenchmarkSpec s;
  s.topology = Topology::RandomDag;
  s.reps = 3;
  s.solvers = {ProxSolver::Sharing, ProxSolver::Fista};
  const BenchReport r = run_prox_bench(s);
  CHECK(r.runs.size() == 6);
  CHECK(r.reference.size() == 3);
  CHECK(r.b.size() == 3);
  for (const auto& run : r.runs) {
    CHECK(std::abs(run.result.objective - r.f_star(run.replication)) <= 1e-6 * std::abs(r.f_star(run.replication)));
    CHECK_FALSE(run.result.trace.empty());
  }

  std::ostringstream os;
  write_summary_csv(os, r);
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  CHECK(header ==
        "solver,reps,converged,iters_mean,objective_mean,max_rel_objective_gap,iters_to_1e-02,iters_to_1e-03,"
        "iters_to_1e-04,iters_to_1e-05,iters_to_1e-06,iters_to_1e-07,iters_to_1e-08,log_rate,r_squared,"
        "max_abs_beta_minus_b");
  std::getline(is, row);
  CHECK(row.rfind("sharing,3,3,", 0) == 0);
  std::getline(is, row);
  CHECK(row.rfind("fista,3,", 0) == 0);

  BenchmarkSpec bad = s;
  bad.reps = 0;
  CHECK_THROWS_AS(run_prox_bench(bad), Error);
  bad = s;
  bad.solvers.clear();
  CHECK_THROWS_AS(run_prox_bench(bad), Error);
}
