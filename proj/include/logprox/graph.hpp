#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "logprox/error.hpp"

namespace logprox {

using Index = Eigen::Index;
using Edge = std::pair<Index, Index>;

/// Directed acyclic graph over N nodes. Node i owns `node_dims[i]` consecutive
/// coordinates of the ambient vector, laid out in node order.
class Dag {
 public:
  Index num_nodes() const { return static_cast<Index>(dims_.size()); }
  Index dim() const { return dim_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Index>& node_dims() const { return dims_; }
  const std::vector<Index>& topological_order() const { return topo_; }
  const std::vector<Index>& parents(Index node) const { return parents_[node]; }
  const std::vector<Index>& children(Index node) const { return children_[node]; }

  /// First coordinate of `node`; its coordinates are [offset, offset + dims[node]).
  Index coordinate_offset(Index node) const { return offsets_[node]; }
  Index node_of_coordinate(Index coord) const;

  Dag reversed() const;

  friend bool operator==(const Dag& a, const Dag& b) {
    return a.dims_ == b.dims_ && a.edges_ == b.edges_;
  }

  friend Dag validate_dag(Index num_nodes, std::vector<Edge> edges, std::vector<Index> node_dims);

 private:
  std::vector<Index> dims_;
  std::vector<Index> offsets_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Index>> parents_;
  std::vector<std::vector<Index>> children_;
  std::vector<Index> topo_;
  Index dim_ = 0;
};

/// Builds a Dag, rejecting cycles, out-of-range endpoints and duplicate edges.
/// An empty `node_dims` means one coordinate per node.
Dag validate_dag(Index num_nodes, std::vector<Edge> edges, std::vector<Index> node_dims = {});

/// Ordered groups of sorted coordinate indices, with one weight per group and
/// the contiguous index range j(g) of every group inside the stacked latent vector.
class GroupSet {
 public:
  GroupSet() = default;

  Index dim() const { return dim_; }
  Index num_groups() const { return static_cast<Index>(groups_.size()); }
  /// Length of the stacked latent vector, n = sum of group sizes.
  Index stacked_dim() const { return offsets_.empty() ? 0 : offsets_.back(); }

  const std::vector<Index>& group(Index g) const { return groups_[g]; }
  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  double weight(Index g) const { return weights_[g]; }
  const std::vector<double>& weights() const { return weights_; }
  Index offset(Index g) const { return offsets_[g]; }
  Index size(Index g) const { return offsets_[g + 1] - offsets_[g]; }

  /// Coordinates contained in at least one group.
  std::vector<bool> coverage() const;
  bool covers_all() const;

  GroupSet with_weights(std::vector<double> weights) const;

  /// Groups permuted by a seed-controlled shuffle (randomized sweeps use a
  /// fresh order per epoch instead; this is for reordering j(.) itself).
  GroupSet shuffled(std::uint64_t seed) const;

  friend bool operator==(const GroupSet&, const GroupSet&) = default;

  friend GroupSet build_index_map(Index dim, std::vector<std::vector<Index>> groups,
                                  std::vector<double> weights);

 private:
  Index dim_ = 0;
  std::vector<std::vector<Index>> groups_;
  std::vector<double> weights_;
  std::vector<Index> offsets_;
};

/// Assigns contiguous stacked ranges to `groups` in listing order. Groups are
/// sorted and deduplicated; an empty `weights` means w_g = sqrt(|g|).
GroupSet build_index_map(Index dim, std::vector<std::vector<Index>> groups,
                         std::vector<double> weights = {});

/// One group per node: the node together with all of its ancestors.
GroupSet ancestor_groups(const Dag& dag);

/// One group per node: the node together with all of its descendants.
GroupSet descendant_groups(const Dag& dag);

enum class HierarchyMode { Strong, Weak };

struct HierarchyViolation {
  Index node;
  std::vector<Index> zero_parents;
};

struct ConformanceReport {
  HierarchyMode mode;
  std::vector<HierarchyViolation> violations;

  std::size_t count() const { return violations.size(); }
};

/// A node is nonzero when any of its coordinates exceeds `threshold` in
/// magnitude. Strong mode flags nonzero nodes with at least one zero parent;
/// weak mode flags nonzero nodes whose parents are all zero.
ConformanceReport check_hierarchy_conformance(const Dag& dag, const Eigen::VectorXd& beta,
                                              double threshold = 1e-8,
                                              HierarchyMode mode = HierarchyMode::Strong);

// Benchmark topologies.

/// Root with `dim - 1` leaf children.
Dag two_layer_tree(Index dim);
/// Complete binary tree with 2^depth - 1 nodes.
Dag binary_tree(int depth);
/// Root followed by two disjoint chains splitting the remaining `dim - 1` nodes.
Dag root_two_paths(Index dim);
/// Erdos-Renyi edges i -> j (i < j) with probability `edge_prob`.
Dag random_dag(Index num_nodes, double edge_prob, std::uint64_t seed);
/// s_0 -> s_1 -> ... -> s_{num_nodes-1}.
Dag chain(Index num_nodes);

}  // namespace logprox
