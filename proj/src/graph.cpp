#include "logprox/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

namespace logprox {

namespace {

// Kahn's algorithm; lowest index first among ready nodes so the order is canonical.
std::vector<Index> topological_sort(Index n, const std::vector<std::vector<Index>>& children,
                                    const std::vector<std::vector<Index>>& parents) {
  std::vector<Index> indegree(n);
  for (Index v = 0; v < n; ++v) indegree[v] = static_cast<Index>(parents[v].size());
  std::set<Index> ready;
  for (Index v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.insert(v);
  std::vector<Index> order;
  order.reserve(n);
  while (!ready.empty()) {
    const Index v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (Index c : children[v])
      if (--indegree[c] == 0) ready.insert(c);
  }
  return order;
}

GroupSet closure_groups(const Dag& dag, bool ancestors) {
  const Index n = dag.num_nodes();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  std::vector<Index> order = dag.topological_order();
  if (!ancestors) std::reverse(order.begin(), order.end());
  for (Index v : order) {
    reach[v][v] = true;
    const auto& preds = ancestors ? dag.parents(v) : dag.children(v);
    for (Index p : preds)
      for (Index u = 0; u < n; ++u)
        if (reach[p][u]) reach[v][u] = true;
  }
  std::vector<std::vector<Index>> groups(n);
  for (Index v = 0; v < n; ++v) {
    for (Index u = 0; u < n; ++u) {
      if (!reach[v][u]) continue;
      const Index off = dag.coordinate_offset(u);
      for (Index k = 0; k < dag.node_dims()[u]; ++k) groups[v].push_back(off + k);
    }
  }
  return build_index_map(dag.dim(), std::move(groups));
}

}  // namespace

Dag validate_dag(Index num_nodes, std::vector<Edge> edges, std::vector<Index> node_dims) {
  if (num_nodes < 1)
    throw Error(ErrorCode::InvalidArgument, "num_nodes must be positive, got " + std::to_string(num_nodes));
  if (node_dims.empty()) node_dims.assign(num_nodes, 1);
  if (static_cast<Index>(node_dims.size()) != num_nodes)
    throw Error(ErrorCode::DimensionMismatch, "node_dims has " + std::to_string(node_dims.size()) +
                                                  " entries for " + std::to_string(num_nodes) + " nodes");
  for (Index v = 0; v < num_nodes; ++v)
    if (node_dims[v] < 1)
      throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(v) + " has nonpositive dimension");

  Dag dag;
  dag.parents_.resize(num_nodes);
  dag.children_.resize(num_nodes);
  std::set<Edge> seen;
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
      throw Error(ErrorCode::IndexOutOfRange, "edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                                  ") outside [0, " + std::to_string(num_nodes) + ")");
    if (u == v) throw Error(ErrorCode::CycleDetected, "self loop at node " + std::to_string(u));
    if (!seen.insert({u, v}).second)
      throw Error(ErrorCode::DuplicateEdge, "edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    dag.children_[u].push_back(v);
    dag.parents_[v].push_back(u);
  }
  for (auto& p : dag.parents_) std::sort(p.begin(), p.end());
  for (auto& c : dag.children_) std::sort(c.begin(), c.end());

  dag.topo_ = topological_sort(num_nodes, dag.children_, dag.parents_);
  if (static_cast<Index>(dag.topo_.size()) != num_nodes)
    throw Error(ErrorCode::CycleDetected, "graph has a directed cycle");

  dag.edges_ = std::move(edges);
  dag.dims_ = std::move(node_dims);
  dag.offsets_.resize(num_nodes);
  std::exclusive_scan(dag.dims_.begin(), dag.dims_.end(), dag.offsets_.begin(), Index{0});
  dag.dim_ = dag.offsets_.back() + dag.dims_.back();
  return dag;
}

Index Dag::node_of_coordinate(Index coord) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), coord);
  return static_cast<Index>(it - offsets_.begin()) - 1;
}

Dag Dag::reversed() const {
  std::vector<Edge> rev;
  rev.reserve(edges_.size());
  for (const auto& [u, v] : edges_) rev.emplace_back(v, u);
  return validate_dag(num_nodes(), std::move(rev), dims_);
}

GroupSet build_index_map(Index dim, std::vector<std::vector<Index>> groups, std::vector<double> weights) {
  if (groups.empty()) throw Error(ErrorCode::EmptyGroup, "group set has no groups");
  if (!weights.empty() && weights.size() != groups.size())
    throw Error(ErrorCode::DimensionMismatch, std::to_string(weights.size()) + " weights for " +
                                                  std::to_string(groups.size()) + " groups");
  GroupSet gs;
  gs.dim_ = dim;
  gs.offsets_.reserve(groups.size() + 1);
  gs.offsets_.push_back(0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& grp = groups[g];
    if (grp.empty()) throw Error(ErrorCode::EmptyGroup, "group " + std::to_string(g) + " is empty");
    std::sort(grp.begin(), grp.end());
    grp.erase(std::unique(grp.begin(), grp.end()), grp.end());
    if (grp.front() < 0 || grp.back() >= dim)
      throw Error(ErrorCode::IndexOutOfRange, "group " + std::to_string(g) + " has a coordinate outside [0, " +
                                                  std::to_string(dim) + ")");
    gs.offsets_.push_back(gs.offsets_.back() + static_cast<Index>(grp.size()));
  }
  if (weights.empty()) {
    weights.reserve(groups.size());
    for (const auto& grp : groups) weights.push_back(std::sqrt(static_cast<double>(grp.size())));
  }
  for (std::size_t g = 0; g < weights.size(); ++g)
    if (!(weights[g] > 0.0) || !std::isfinite(weights[g]))
      throw Error(ErrorCode::InvalidArgument, "group " + std::to_string(g) + " has a nonpositive weight");
  gs.groups_ = std::move(groups);
  gs.weights_ = std::move(weights);
  return gs;
}

std::vector<bool> GroupSet::coverage() const {
  std::vector<bool> covered(dim_, false);
  for (const auto& grp : groups_)
    for (Index i : grp) covered[i] = true;
  return covered;
}

bool GroupSet::covers_all() const {
  const auto c = coverage();
  return std::all_of(c.begin(), c.end(), [](bool b) { return b; });
}

GroupSet GroupSet::with_weights(std::vector<double> weights) const {
  return build_index_map(dim_, groups_, std::move(weights));
}

GroupSet GroupSet::shuffled(std::uint64_t seed) const {
  std::vector<std::size_t> perm(groups_.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Index>> groups;
  std::vector<double> weights;
  for (std::size_t p : perm) {
    groups.push_back(groups_[p]);
    weights.push_back(weights_[p]);
  }
  return build_index_map(dim_, std::move(groups), std::move(weights));
}

GroupSet ancestor_groups(const Dag& dag) { return closure_groups(dag, true); }

GroupSet descendant_groups(const Dag& dag) { return closure_groups(dag, false); }

ConformanceReport check_hierarchy_conformance(const Dag& dag, const Eigen::VectorXd& beta, double threshold,
                                              HierarchyMode mode) {
  if (beta.size() != dag.dim())
    throw Error(ErrorCode::DimensionMismatch, "beta has length " + std::to_string(beta.size()) +
                                                  ", graph dimension is " + std::to_string(dag.dim()));
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");

  std::vector<bool> nonzero(dag.num_nodes(), false);
  for (Index v = 0; v < dag.num_nodes(); ++v)
    nonzero[v] = (beta.segment(dag.coordinate_offset(v), dag.node_dims()[v]).array().abs() > threshold).any();

  ConformanceReport report{mode, {}};
  for (Index v = 0; v < dag.num_nodes(); ++v) {
    const auto& parents = dag.parents(v);
    if (!nonzero[v] || parents.empty()) continue;
    std::vector<Index> zero_parents;
    for (Index p : parents)
      if (!nonzero[p]) zero_parents.push_back(p);
    const bool violated =
        mode == HierarchyMode::Strong ? !zero_parents.empty() : zero_parents.size() == parents.size();
    if (violated) report.violations.push_back({v, std::move(zero_parents)});
  }
  return report;
}

Dag two_layer_tree(Index dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "two_layer needs at least one node");
  std::vector<Edge> edges;
  for (Index v = 1; v < dim; ++v) edges.emplace_back(0, v);
  return validate_dag(dim, std::move(edges));
}

Dag binary_tree(int depth) {
  if (depth < 1 || depth > 24) throw Error(ErrorCode::InvalidArgument, "binary_tree depth must be in [1, 24]");
  const Index n = (Index{1} << depth) - 1;
  std::vector<Edge> edges;
  for (Index v = 1; v < n; ++v) edges.emplace_back((v - 1) / 2, v);
  return validate_dag(n, std::move(edges));
}

Dag root_two_paths(Index dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "root_two_paths needs at least one node");
  const Index rest = dim - 1;
  const Index first = (rest + 1) / 2;
  std::vector<Edge> edges;
  // Path A: 0 -> 1 -> ... -> first; path B: 0 -> first+1 -> ... -> dim-1.
  for (Index v = 1; v <= first; ++v) edges.emplace_back(v == 1 ? 0 : v - 1, v);
  for (Index v = first + 1; v < dim; ++v) edges.emplace_back(v == first + 1 ? 0 : v - 1, v);
  return validate_dag(dim, std::move(edges));
}

Dag random_dag(Index num_nodes, double edge_prob, std::uint64_t seed) {
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "edge_prob must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Edge> edges;
  for (Index i = 0; i < num_nodes; ++i)
    for (Index j = i + 1; j < num_nodes; ++j)
      if (unif(rng) < edge_prob) edges.emplace_back(i, j);
  return validate_dag(num_nodes, std::move(edges));
}

Dag chain(Index num_nodes) {
  std::vector<Edge> edges;
  for (Index v = 1; v < num_nodes; ++v) edges.emplace_back(v - 1, v);
  return validate_dag(num_nodes, std::move(edges));
}

}  // namespace logprox
