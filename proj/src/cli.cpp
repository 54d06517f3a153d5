#include "logprox/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "logprox/bench.hpp"
#include "logprox/diagnostics.hpp"
#include "logprox/io.hpp"
#include "logprox/learn.hpp"
#include "logprox/solvers.hpp"

namespace logprox::cli {

namespace {

struct SolverFlags {
  double rho = 1.0;
  std::optional<double> alpha;
  double tol = 1e-10;
  int max_iter = 100000;

  void add_to(CLI::App* app) {
    app->add_option("--rho", rho, "ADMM penalty parameter")->capture_default_str();
    app->add_option("--alpha", alpha, "ADMM dual step, 0 < alpha < rho (default rho/2)");
    app->add_option("--tol", tol, "stopping tolerance")->capture_default_str();
    app->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
  }

  SolveOptions options() const {
    SolveOptions o;
    o.rho = rho;
    o.alpha = alpha;
    o.tol_opt = o.tol_primal = o.tol_dual = tol;
    o.max_iter = max_iter;
    return o;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  return f;
}

std::string groups_hash(const GroupSet& gs) {
  std::ostringstream ss;
  io::write_groups(ss, gs);
  return io::hex64(io::fnv1a64(ss.str()));
}

/// Graph file yields ancestor groups; a group file is read against `dim`.
struct Structure {
  std::optional<Dag> dag;
  GroupSet groups;
};

Structure load_structure(const std::string& graph_path, const std::string& groups_path, Index dim) {
  if (graph_path.empty() == groups_path.empty())
    throw Error(ErrorCode::InvalidArgument, "pass exactly one of --graph or --groups");
  Structure s;
  if (!graph_path.empty()) {
    s.dag = io::read_graph_file(graph_path);
    if (s.dag->dim() != dim)
      throw Error(ErrorCode::DimensionMismatch, graph_path + ": graph has dimension " + std::to_string(s.dag->dim()) +
                                                    ", data has " + std::to_string(dim));
    s.groups = ancestor_groups(*s.dag);
  } else {
    s.groups = io::read_groups_file(groups_path, dim);
  }
  return s;
}

// ---------------------------------------------------------------- prox-bench

struct BenchArgs {
  std::string topology = "random_dag";
  Index nodes = 0;
  int depth = 7;
  double edge_prob = 0.3;
  std::uint64_t seed = 1;
  int reps = 10;
  double lambda = 0.5;
  std::string solvers = "bcd,rbcd,admm,sharing,pgm,fista";
  SolverFlags flags{1.0, std::nullopt, 1e-8, 200000};
  int trace_every = 1;
  std::string out_dir = "bench_out";
};

int cmd_prox_bench(const BenchArgs& a, std::ostream& out) {
  BenchmarkSpec spec;
  spec.topology = parse_topology(a.topology);
  spec.nodes = a.nodes;
  spec.depth = a.depth;
  spec.edge_prob = a.edge_prob;
  spec.seed = a.seed;
  spec.reps = a.reps;
  spec.lambda = a.lambda;
  spec.solvers.clear();
  for (const auto& s : split_list(a.solvers)) spec.solvers.push_back(parse_solver(s));
  spec.opts = a.flags.options();
  spec.opts.trace_every = a.trace_every;
  if (a.trace_every < 1) throw Error(ErrorCode::InvalidArgument, "--trace-every must be at least 1");

  const BenchReport report = run_prox_bench(spec);
  write_bench_artifacts(report, a.out_dir);
  write_summary_csv(out, report);
  return kOk;
}

// ---------------------------------------------------------------------- prox

struct ProxArgs {
  std::string b_path, b_inline, graph, groups, out, latent_out;
  double lambda = 0.5;
  std::string solver = "sharing";
  SolverFlags flags;
};

int cmd_prox(const ProxArgs& a, std::ostream& out, std::ostream& err) {
  if (a.b_path.empty() == a.b_inline.empty())
    throw Error(ErrorCode::InvalidArgument, "pass exactly one of --b or --b-inline");
  const Eigen::VectorXd b = a.b_path.empty() ? io::parse_inline_vector(a.b_inline) : io::read_vector_csv(a.b_path);
  const Structure s = load_structure(a.graph, a.groups, b.size());
  const ProxInstance<double> inst(b, a.lambda, SumOperator<double>(s.groups));
  const auto r = solve_prox(inst, parse_solver(a.solver), a.flags.options());
  if (r.status != SolveStatus::Converged)
    err << "logprox prox: warning: " << a.solver << " stopped at max_iter = " << r.iterations << "\n";

  if (a.out.empty()) {
    io::write_vector_csv(out, r.beta);
  } else {
    auto f = open_output(a.out);
    io::write_vector_csv(f, r.beta);
  }
  if (!a.latent_out.empty()) {
    auto f = open_output(a.latent_out);
    io::write_matrix_csv(f, r.latent_matrix(s.groups));
  }
  return kOk;
}

// ----------------------------------------------------------------------- fit

struct FitArgs {
  std::string loss = "least_squares", data, response, graph, groups, out;
  std::optional<double> lambda, lambda_frac;
  bool accelerated = false;
  int max_iter = 2000;
  double tol = 1e-6;
  SolverFlags inner{1.0, std::nullopt, 1e-10, 100000};
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  if (a.lambda.has_value() == a.lambda_frac.has_value())
    throw Error(ErrorCode::InvalidArgument, "pass exactly one of --lambda or --lambda-frac");
  const Eigen::MatrixXd x = io::read_matrix_csv(a.data);
  const Eigen::VectorXd y = io::read_vector_csv(a.response);
  if (x.rows() != y.size())
    throw Error(ErrorCode::DimensionMismatch, a.response + ": " + std::to_string(y.size()) + " responses for " +
                                                  std::to_string(x.rows()) + " rows in " + a.data);
  const Structure s = load_structure(a.graph, a.groups, x.cols());

  std::unique_ptr<SmoothLoss<double>> loss;
  if (a.loss == "least_squares")
    loss = std::make_unique<LeastSquaresLoss<double>>(x, y);
  else if (a.loss == "logistic")
    loss = std::make_unique<LogisticLoss<double>>(x, y);
  else
    throw Error(ErrorCode::InvalidArgument, "unknown loss '" + a.loss + "' (least_squares or logistic)");

  const double lambda = a.lambda ? *a.lambda : *a.lambda_frac * lambda_max(*loss, s.groups);
  FitOptions fopts;
  fopts.max_iter = a.max_iter;
  fopts.tol = a.tol;
  fopts.accelerated = a.accelerated;
  SolveOptions inner = a.inner.options();
  fopts.inner_tol_floor = a.inner.tol;
  const auto r = fit(*loss, s.groups, lambda, fopts, inner);

  if (!a.out.empty()) {
    auto f = open_output(a.out);
    io::write_model(f, {x.cols(), lambda, groups_hash(s.groups), a.loss, r.beta});
  }
  out << "objective=" << io::format_double(r.objective) << " lambda=" << io::format_double(lambda)
      << " support=" << r.support.size() << " strong_violations=";
  if (s.dag)
    out << check_hierarchy_conformance(*s.dag, r.beta, fopts.support_threshold).count();
  else
    out << "na";
  out << " outer_iters=" << r.outer_iters << " inner_iters=" << r.inner_iters
      << " status=" << (r.status == SolveStatus::Converged ? "converged" : "max_iter") << "\n";
  return kOk;
}

// --------------------------------------------------------------------- synth

struct SynthArgs {
  Index nodes = 20;
  Index active = 8;
  Index samples = 100;
  double noise = 0.1;
  std::uint64_t seed = 1;
  std::string loss = "least_squares";
  std::string out_dir = ".";
};

// Chain DAG 0 -> 1 -> ... with the first `active` nodes nonzero, Gaussian design.
int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.nodes < 1 || a.active < 0 || a.active > a.nodes || a.samples < 1 || !(a.noise >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "synth: need nodes >= 1, 0 <= active <= nodes, samples >= 1, noise >= 0");
  if (a.loss != "least_squares" && a.loss != "logistic")
    throw Error(ErrorCode::InvalidArgument, "unknown loss '" + a.loss + "'");
  std::mt19937_64 rng(a.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> mag(1.0, 2.0);

  const Dag dag = chain(a.nodes);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(a.nodes);
  for (Index i = 0; i < a.active; ++i) beta[i] = (rng() & 1 ? 1.0 : -1.0) * mag(rng);
  Eigen::MatrixXd x(a.samples, a.nodes);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
  Eigen::VectorXd y = x * beta;
  for (Index i = 0; i < y.size(); ++i) y[i] += a.noise * normal(rng);
  if (a.loss == "logistic") y = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });

  const std::filesystem::path dir(a.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  {
    auto f = open_output((dir / "graph.txt").string());
    io::write_graph(f, dag);
  }
  {
    auto f = open_output((dir / "X.csv").string());
    io::write_matrix_csv(f, x);
  }
  {
    auto f = open_output((dir / "y.csv").string());
    io::write_vector_csv(f, y);
  }
  {
    auto f = open_output((dir / "beta_true.csv").string());
    io::write_vector_csv(f, beta);
  }
  out << "wrote " << dir.string() << " (d=" << a.nodes << ", n=" << a.samples << ")\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent overlapping group lasso: proximal solvers, benchmarks and model fitting", "logprox"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* pb = app.add_subcommand("prox-bench", "simulation benchmark of the prox solvers");
  pb->add_option("--topology", bench.topology, "two_layer | binary_tree | root_two_paths | random_dag")
      ->capture_default_str();
  pb->add_option("--nodes", bench.nodes, "node count (default 101 for trees, 8 for random_dag)");
  pb->add_option("--depth", bench.depth, "binary tree depth")->capture_default_str();
  pb->add_option("--edge-prob", bench.edge_prob, "random DAG edge probability")->capture_default_str();
  pb->add_option("--seed", bench.seed, "instance seed")->capture_default_str();
  pb->add_option("--reps", bench.reps, "replications")->capture_default_str();
  pb->add_option("--lambda", bench.lambda, "regularization")->capture_default_str();
  pb->add_option("--solvers", bench.solvers, "comma list of bcd,rbcd,admm,sharing,pgm,fista")->capture_default_str();
  bench.flags.add_to(pb);
  pb->add_option("--trace-every", bench.trace_every, "trace stride")->capture_default_str();
  pb->add_option("--out-dir", bench.out_dir, "artifact directory")->capture_default_str();

  ProxArgs prox;
  auto* pp = app.add_subcommand("prox", "evaluate the proximal operator once");
  pp->add_option("--b", prox.b_path, "input vector CSV");
  pp->add_option("--b-inline", prox.b_inline, "input vector as comma list");
  pp->add_option("--graph", prox.graph, "DAG edge-list file (ancestor groups)");
  pp->add_option("--groups", prox.groups, "group file");
  pp->add_option("--lambda", prox.lambda, "regularization")->capture_default_str();
  pp->add_option("--solver", prox.solver, "bcd | rbcd | admm | sharing | pgm | fista")->capture_default_str();
  prox.flags.add_to(pp);
  pp->add_option("--out", prox.out, "write beta here instead of stdout");
  pp->add_option("--latent-out", prox.latent_out, "latent decomposition, one column per group");

  FitArgs fa;
  auto* pf = app.add_subcommand("fit", "fit a regularized model");
  pf->add_option("--loss", fa.loss, "least_squares | logistic")->capture_default_str();
  pf->add_option("--data", fa.data, "design matrix CSV, rows are samples")->required();
  pf->add_option("--response", fa.response, "response CSV (labels in {-1,+1} for logistic)")->required();
  pf->add_option("--graph", fa.graph, "DAG edge-list file (ancestor groups)");
  pf->add_option("--groups", fa.groups, "group file");
  pf->add_option("--lambda", fa.lambda, "regularization");
  pf->add_option("--lambda-frac", fa.lambda_frac, "regularization as a multiple of lambda_max");
  pf->add_flag("--accelerated", fa.accelerated, "FISTA outer loop");
  pf->add_option("--max-iter", fa.max_iter, "outer iteration cap")->capture_default_str();
  pf->add_option("--tol", fa.tol, "outer tolerance")->capture_default_str();
  pf->add_option("--rho", fa.inner.rho, "inner ADMM penalty")->capture_default_str();
  pf->add_option("--alpha", fa.inner.alpha, "inner ADMM dual step");
  pf->add_option("--inner-tol", fa.inner.tol, "inner tolerance floor")->capture_default_str();
  pf->add_option("--inner-max-iter", fa.inner.max_iter, "inner iteration cap")->capture_default_str();
  pf->add_option("--out", fa.out, "model file");

  SynthArgs sa;
  auto* ps = app.add_subcommand("synth", "generate a chain-DAG regression dataset");
  ps->add_option("--nodes", sa.nodes)->capture_default_str();
  ps->add_option("--active", sa.active, "leading nonzero nodes")->capture_default_str();
  ps->add_option("--samples", sa.samples)->capture_default_str();
  ps->add_option("--noise", sa.noise)->capture_default_str();
  ps->add_option("--seed", sa.seed)->capture_default_str();
  ps->add_option("--loss", sa.loss)->capture_default_str();
  ps->add_option("--out-dir", sa.out_dir)->capture_default_str();

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  for (auto& s : storage) argv.push_back(s.data());
  const std::string prog = "logprox";
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << prog << ": error: " << e.what() << "\n";
    return kValidation;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "prox-bench") return cmd_prox_bench(bench, out);
    if (sub == "prox") return cmd_prox(prox, out, err);
    if (sub == "fit") return cmd_fit(fa, out);
    return cmd_synth(sa, out);
  } catch (const Error& e) {
    err << prog << ' ' << sub << ": error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? kValidation : kRuntimeFailure;
  } catch (const std::exception& e) {
    err << prog << ' ' << sub << ": error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace logprox::cli
