#pragma once

// Binary merge tree produced by agglomerative clustering of classifiers. The
// same tree doubles as the t-norm computation graph: every internal node
// combines its two children with its own Aczel-Alsina parameter.

#include <optional>
#include <span>
#include <vector>

#include "spocc/estimation.hpp"
#include "spocc/possibility.hpp"

namespace spocc {

/// Reference to a dendrogram node: a leaf (classifier index) or an internal node.
struct NodeRef {
  bool is_leaf = true;
  std::size_t index = 0;

  static NodeRef leaf(std::size_t k) { return {true, k}; }
  static NodeRef internal(std::size_t a) { return {false, a}; }
  bool operator==(const NodeRef&) const = default;
};

struct InternalNode {
  NodeRef left;
  NodeRef right;
  /// Cophenetic distance at which the two children merge.
  double height = 0.0;
};

class Dendrogram {
 public:
  Dendrogram() = default;

  /// Validates the structure: K leaves, K - 1 internal nodes forming one binary tree.
  Dendrogram(std::size_t leaves, std::vector<InternalNode> internals);

  std::size_t leaf_count() const noexcept { return leaves_; }
  std::size_t internal_count() const noexcept { return internals_.size(); }
  const std::vector<InternalNode>& internals() const noexcept { return internals_; }
  const InternalNode& internal(std::size_t a) const { return internals_.at(a); }

  /// Root node; a single-leaf tree has the leaf as its root.
  NodeRef root() const noexcept { return root_; }
  std::optional<std::size_t> parent(NodeRef node) const;

  /// Internal nodes ordered so that every node comes after its internal children.
  const std::vector<std::size_t>& postorder() const noexcept { return postorder_; }

  /// Leaf indices below `node`, ascending.
  std::vector<std::size_t> leaves_under(NodeRef node) const;
  /// Internal nodes below `node` including itself, in post-order.
  std::vector<std::size_t> internals_under(NodeRef node) const;
  /// True when internal node `ancestor` lies on the path from `node` to the root.
  bool is_ancestor(std::size_t ancestor, NodeRef node) const;

  /// Replace leaf `sibling` by a new internal node joining it with a new leaf K.
  /// Returns the index of the new internal node.
  std::size_t insert_leaf_beside(std::size_t sibling, double height);
  /// Add a new leaf K under a new root above the current root.
  std::size_t insert_leaf_above_root(double height);

  bool operator==(const Dendrogram& other) const;

 private:
  void rebuild_index();

  std::size_t leaves_ = 0;
  std::vector<InternalNode> internals_;
  NodeRef root_;
  std::vector<std::optional<std::size_t>> leaf_parent_;
  std::vector<std::optional<std::size_t>> internal_parent_;
  std::vector<std::size_t> postorder_;
};

/// Per-internal-node t-norm parameters.
using LambdaArray = std::vector<TNormParam>;

/// True when every internal node's parameter is <= each internal child's.
bool lambdas_monotone(const Dendrogram& g, std::span<const TNormParam> lambdas);

/// Average-linkage agglomerative clustering. Ties merge the lexicographically
/// smallest pair of clusters (clusters ordered by their smallest leaf).
Dendrogram hac(const DependenceMatrix& d);

struct Clustering {
  /// Classifier indices per cluster, each ascending; clusters ordered by first leaf.
  std::vector<std::vector<std::size_t>> clusters;
  /// Subtree root of each cluster.
  std::vector<NodeRef> roots;
  /// False when tied merge heights made the requested count unattainable.
  bool exact = true;
};

/// Flat clusters from cutting the dendrogram at the smallest threshold that
/// yields `count` subtrees.
Clustering clusters_at(const Dendrogram& g, std::size_t count);

/// Post-order evaluation of the computation graph: J_{G; lambda}(leaf_dists).
PossibilityDistribution execute(const Dendrogram& g, std::span<const TNormParam> lambdas,
                                std::span<const PossibilityDistribution> leaf_dists);

struct Placement {
  /// True when the new leaf joined an existing cluster.
  bool joined = false;
  /// Leaf the new classifier was attached beside when it joined.
  std::size_t sibling = 0;
  /// Index of the new internal node.
  std::size_t node = 0;
};

struct AppendResult {
  Dendrogram tree;
  Placement placement;
};

/// Append leaf K. When the smallest entry of `new_dissims` is below `threshold`
/// the leaf joins the cluster of its nearest leaf, attached beside that leaf;
/// otherwise it becomes a singleton cluster under a new root. Merge heights come
/// from `heights` (defaults to `new_dissims`) clamped to keep heights monotone.
/// The caller assigns the new node's lambda.
/// Throws std::invalid_argument for a threshold outside [0, 1] or wrong sizes.
AppendResult append_leaf(const Dendrogram& g, std::span<const double> new_dissims,
                         double threshold, std::span<const double> heights = {});

}  // namespace spocc
