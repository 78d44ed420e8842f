#include "spocc/dendrogram.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spocc {

Dendrogram::Dendrogram(std::size_t leaves, std::vector<InternalNode> internals)
    : leaves_(leaves), internals_(std::move(internals)) {
  if (leaves_ == 0) throw std::invalid_argument("dendrogram needs at least one leaf");
  if (internals_.size() + 1 != leaves_)
    throw std::invalid_argument("dendrogram must have exactly K - 1 internal nodes");
  rebuild_index();
}

void Dendrogram::rebuild_index() {
  leaf_parent_.assign(leaves_, std::nullopt);
  internal_parent_.assign(internals_.size(), std::nullopt);
  auto claim = [&](NodeRef child, std::size_t parent) {
    auto& slot = child.is_leaf ? leaf_parent_ : internal_parent_;
    if (child.index >= slot.size()) throw std::invalid_argument("dendrogram: child out of range");
    if (slot[child.index]) throw std::invalid_argument("dendrogram: node has two parents");
    if (!child.is_leaf && child.index == parent)
      throw std::invalid_argument("dendrogram: node is its own child");
    slot[child.index] = parent;
  };
  for (std::size_t a = 0; a < internals_.size(); ++a) {
    claim(internals_[a].left, a);
    claim(internals_[a].right, a);
  }

  if (internals_.empty()) {
    root_ = NodeRef::leaf(0);
  } else {
    std::optional<std::size_t> root;
    for (std::size_t a = 0; a < internals_.size(); ++a) {
      if (internal_parent_[a]) continue;
      if (root) throw std::invalid_argument("dendrogram: more than one root");
      root = a;
    }
    if (!root) throw std::invalid_argument("dendrogram: no root (cycle)");
    root_ = NodeRef::internal(*root);
  }

  // Iterative post-order from the root; also proves every node is reachable.
  postorder_.clear();
  std::size_t leaves_seen = 0;
  if (!root_.is_leaf) {
    std::vector<std::pair<std::size_t, bool>> stack{{root_.index, false}};
    while (!stack.empty()) {
      auto [a, expanded] = stack.back();
      stack.pop_back();
      if (expanded) {
        postorder_.push_back(a);
        continue;
      }
      stack.push_back({a, true});
      for (NodeRef child : {internals_[a].right, internals_[a].left}) {
        if (child.is_leaf)
          ++leaves_seen;
        else
          stack.push_back({child.index, false});
      }
      if (postorder_.size() + stack.size() > 2 * internals_.size() + 2)
        throw std::invalid_argument("dendrogram: cycle detected");
    }
  } else {
    leaves_seen = 1;
  }
  if (postorder_.size() != internals_.size() || leaves_seen != leaves_)
    throw std::invalid_argument("dendrogram: nodes unreachable from the root");

  for (std::size_t a = 0; a < internals_.size(); ++a)
    if (auto p = internal_parent_[a]; p && internals_[a].height > internals_[*p].height)
      throw std::invalid_argument("dendrogram: merge heights must not decrease toward the root");
}

std::optional<std::size_t> Dendrogram::parent(NodeRef node) const {
  const auto& slot = node.is_leaf ? leaf_parent_ : internal_parent_;
  return slot.at(node.index);
}

std::vector<std::size_t> Dendrogram::leaves_under(NodeRef node) const {
  std::vector<std::size_t> out;
  std::vector<NodeRef> stack{node};
  while (!stack.empty()) {
    NodeRef n = stack.back();
    stack.pop_back();
    if (n.is_leaf) {
      out.push_back(n.index);
    } else {
      stack.push_back(internals_[n.index].left);
      stack.push_back(internals_[n.index].right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> Dendrogram::internals_under(NodeRef node) const {
  std::vector<std::size_t> out;
  if (node.is_leaf) return out;
  for (std::size_t a : postorder_)
    if (a == node.index || is_ancestor(node.index, NodeRef::internal(a))) out.push_back(a);
  return out;
}

bool Dendrogram::is_ancestor(std::size_t ancestor, NodeRef node) const {
  auto p = parent(node);
  while (p) {
    if (*p == ancestor) return true;
    p = internal_parent_[*p];
  }
  return false;
}

std::size_t Dendrogram::insert_leaf_beside(std::size_t sibling, double height) {
  if (sibling >= leaves_) throw std::out_of_range("insert_leaf_beside: no such leaf");
  const std::size_t new_leaf = leaves_;
  const std::size_t node = internals_.size();
  const auto parent_of_sibling = leaf_parent_[sibling];
  internals_.push_back({NodeRef::leaf(sibling), NodeRef::leaf(new_leaf), height});
  if (parent_of_sibling) {
    auto& p = internals_[*parent_of_sibling];
    (p.left == NodeRef::leaf(sibling) ? p.left : p.right) = NodeRef::internal(node);
  }
  ++leaves_;
  rebuild_index();
  return node;
}

std::size_t Dendrogram::insert_leaf_above_root(double height) {
  const std::size_t new_leaf = leaves_;
  const std::size_t node = internals_.size();
  internals_.push_back({root_, NodeRef::leaf(new_leaf), height});
  ++leaves_;
  rebuild_index();
  return node;
}

bool Dendrogram::operator==(const Dendrogram& other) const {
  if (leaves_ != other.leaves_ || internals_.size() != other.internals_.size()) return false;
  for (std::size_t a = 0; a < internals_.size(); ++a) {
    const auto& x = internals_[a];
    const auto& y = other.internals_[a];
    if (!(x.left == y.left) || !(x.right == y.right) || x.height != y.height) return false;
  }
  return true;
}

bool lambdas_monotone(const Dendrogram& g, std::span<const TNormParam> lambdas) {
  if (lambdas.size() != g.internal_count()) return false;
  for (std::size_t a = 0; a < g.internal_count(); ++a)
    for (NodeRef child : {g.internal(a).left, g.internal(a).right})
      if (!child.is_leaf && lambdas[child.index] < lambdas[a]) return false;
  return true;
}

Dendrogram hac(const DependenceMatrix& d) {
  const std::size_t K = d.size();
  if (K < 2) throw std::invalid_argument("hac: need at least two classifiers");

  struct Cluster {
    std::size_t first_leaf;
    std::size_t size;
    NodeRef node;
  };
  std::vector<Cluster> active;
  for (std::size_t k = 0; k < K; ++k) active.push_back({k, 1, NodeRef::leaf(k)});
  // Linkage distances between active clusters, indexed by position in `active`.
  std::vector<std::vector<double>> dist(K, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) dist[i][j] = d(i, j);

  std::vector<InternalNode> internals;
  double last_height = -std::numeric_limits<double>::infinity();
  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j)
        if (dist[i][j] < best) {
          best = dist[i][j];
          bi = i;
          bj = j;
        }
    const double height = std::max(best, last_height);
    last_height = height;
    const std::size_t node = internals.size();
    internals.push_back({active[bi].node, active[bj].node, height});

    // Average linkage (Lance-Williams): size-weighted mean of the two rows.
    const double ni = static_cast<double>(active[bi].size);
    const double nj = static_cast<double>(active[bj].size);
    for (std::size_t m = 0; m < active.size(); ++m) {
      if (m == bi || m == bj) continue;
      const double merged = (ni * dist[bi][m] + nj * dist[bj][m]) / (ni + nj);
      dist[bi][m] = dist[m][bi] = merged;
    }
    active[bi] = {std::min(active[bi].first_leaf, active[bj].first_leaf),
                  active[bi].size + active[bj].size, NodeRef::internal(node)};
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(bj));
    for (auto& row : dist) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return Dendrogram(K, std::move(internals));
}

Clustering clusters_at(const Dendrogram& g, std::size_t count) {
  const std::size_t K = g.leaf_count();
  if (count < 1 || count > K) throw std::invalid_argument("clusters_at: count outside [1, K]");

  const std::size_t n = g.internal_count();
  std::vector<std::size_t> depth(n, 0);
  for (auto it = g.postorder().rbegin(); it != g.postorder().rend(); ++it)
    if (auto p = g.parent(NodeRef::internal(*it))) depth[*it] = depth[*p] + 1;

  // Highest merges first; among equal heights, ancestors before descendants.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ha = g.internal(a).height, hb = g.internal(b).height;
    if (ha != hb) return ha > hb;
    if (depth[a] != depth[b]) return depth[a] < depth[b];
    return a < b;
  });

  // Cutting m nodes is only possible with a threshold strictly between the
  // m-th and (m+1)-th heights.
  std::size_t m = count - 1;
  while (m > 0 && m < n && g.internal(order[m - 1]).height == g.internal(order[m]).height) --m;

  std::vector<bool> cut(n, false);
  for (std::size_t i = 0; i < m; ++i) cut[order[i]] = true;

  Clustering result;
  result.exact = m == count - 1;
  std::vector<NodeRef> stack{g.root()};
  while (!stack.empty()) {
    NodeRef node = stack.back();
    stack.pop_back();
    if (!node.is_leaf && cut[node.index]) {
      stack.push_back(g.internal(node.index).right);
      stack.push_back(g.internal(node.index).left);
    } else {
      result.roots.push_back(node);
      result.clusters.push_back(g.leaves_under(node));
    }
  }
  std::vector<std::size_t> idx(result.clusters.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return result.clusters[a].front() < result.clusters[b].front();
  });
  Clustering sorted;
  sorted.exact = result.exact;
  for (std::size_t i : idx) {
    sorted.clusters.push_back(std::move(result.clusters[i]));
    sorted.roots.push_back(result.roots[i]);
  }
  return sorted;
}

PossibilityDistribution execute(const Dendrogram& g, std::span<const TNormParam> lambdas,
                                std::span<const PossibilityDistribution> leaf_dists) {
  if (leaf_dists.size() != g.leaf_count())
    throw std::invalid_argument("execute: need one distribution per leaf");
  if (lambdas.size() != g.internal_count())
    throw std::invalid_argument("execute: need one lambda per internal node");
  const std::size_t width = leaf_dists.front().size();
  for (const auto& d : leaf_dists)
    if (d.size() != width) throw std::invalid_argument("execute: distribution length mismatch");
  if (g.root().is_leaf) return leaf_dists[g.root().index];

  std::vector<PossibilityDistribution> values(g.internal_count(),
                                              PossibilityDistribution(width));
  auto value_of = [&](NodeRef ref) -> const PossibilityDistribution& {
    return ref.is_leaf ? leaf_dists[ref.index] : values[ref.index];
  };
  for (std::size_t a : g.postorder()) {
    const auto& node = g.internal(a);
    tnorm_pair(lambdas[a], value_of(node.left), value_of(node.right), values[a]);
  }
  return values[g.root().index];
}

AppendResult append_leaf(const Dendrogram& g, std::span<const double> new_dissims,
                         double threshold, std::span<const double> heights) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("append_leaf: threshold outside [0, 1]");
  if (new_dissims.size() != g.leaf_count())
    throw std::invalid_argument("append_leaf: need one dissimilarity per existing leaf");
  if (heights.empty()) heights = new_dissims;
  if (heights.size() != g.leaf_count())
    throw std::invalid_argument("append_leaf: need one height per existing leaf");

  const auto nearest = static_cast<std::size_t>(
      std::min_element(new_dissims.begin(), new_dissims.end()) - new_dissims.begin());

  AppendResult result{g, {}};
  if (new_dissims[nearest] < threshold) {
    double h = std::max(0.0, heights[nearest]);
    if (auto p = g.parent(NodeRef::leaf(nearest))) h = std::min(h, g.internal(*p).height);
    result.placement = {true, nearest, result.tree.insert_leaf_beside(nearest, h)};
  } else {
    const double mean =
        std::accumulate(heights.begin(), heights.end(), 0.0) / static_cast<double>(heights.size());
    const double root_height = g.root().is_leaf ? 0.0 : g.internal(g.root().index).height;
    result.placement = {false, 0, result.tree.insert_leaf_above_root(std::max(mean, root_height))};
  }
  return result;
}

}  // namespace spocc
