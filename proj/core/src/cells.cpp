#include "cells.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace spocc::detail {

CellTable group_cells(const ValidationTable& table) {
  std::vector<std::size_t> rows(table.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return group_cells(table, rows);
}

CellTable group_cells(const ValidationTable& table, std::span<const std::size_t> rows) {
  CellTable out;
  out.classifiers = table.classifiers();
  out.labels = table.label_count();
  std::map<std::vector<Label>, std::size_t> index;
  std::vector<Label> key(out.classifiers);
  for (std::size_t r : rows) {
    auto row = table.row(r);
    key.assign(row.begin(), row.end());
    auto [it, inserted] = index.try_emplace(key, out.size());
    if (inserted) {
      out.preds.insert(out.preds.end(), row.begin(), row.end());
      out.truth_counts.resize(out.truth_counts.size() + out.labels, 0.0);
    }
    out.truth_counts[it->second * out.labels + table.truth(r)] += 1.0;
    out.total += 1.0;
  }
  return out;
}

double expected_correct(std::span<const double> scores, std::span<const double> truth_counts) {
  const double top = *std::max_element(scores.begin(), scores.end());
  double ties = 0.0, hits = 0.0;
  for (std::size_t y = 0; y < scores.size(); ++y)
    if (scores[y] == top) {
      ties += 1.0;
      hits += truth_counts[y];
    }
  return hits / ties;
}

GraphEvaluator::GraphEvaluator(const Dendrogram& g, LambdaArray lambdas,
                               const PossibilityTables& tables, const CellTable& cells)
    : g_(g),
      lambdas_(std::move(lambdas)),
      tables_(tables),
      cells_(cells),
      width_(cells.labels),
      values_(g.internal_count(), std::vector<double>(cells.size() * cells.labels)),
      dirty_(g.internal_count(), true) {
  if (lambdas_.size() != g.internal_count())
    throw std::invalid_argument("GraphEvaluator: one lambda per internal node required");
  if (tables_.size() != g.leaf_count())
    throw std::invalid_argument("GraphEvaluator: one table per leaf required");
}

void GraphEvaluator::set(std::size_t node, TNormParam lambda) {
  if (lambdas_[node] == lambda) return;
  lambdas_[node] = lambda;
  for (std::optional<std::size_t> a = node; a; a = g_.parent(NodeRef::internal(*a)))
    dirty_[*a] = true;
}

std::span<const double> GraphEvaluator::value(NodeRef ref, std::size_t cell) const {
  if (ref.is_leaf) return tables_[ref.index][cells_.cell(cell)[ref.index]];
  return {values_[ref.index].data() + cell * width_, width_};
}

void GraphEvaluator::refresh() {
  for (std::size_t a : g_.postorder()) {
    if (!dirty_[a]) continue;
    const auto& node = g_.internal(a);
    for (std::size_t c = 0; c < cells_.size(); ++c)
      tnorm_pair(lambdas_[a], value(node.left, c), value(node.right, c),
                 {values_[a].data() + c * width_, width_});
    dirty_[a] = false;
  }
}

double GraphEvaluator::accuracy() {
  if (cells_.total == 0.0) return 0.0;
  refresh();
  const NodeRef root = g_.root();
  double correct = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c)
    correct += expected_correct(value(root, c), cells_.counts(c));
  return correct / cells_.total;
}

}  // namespace spocc::detail
