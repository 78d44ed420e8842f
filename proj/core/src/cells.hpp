#pragma once

// Validation rows grouped by prediction vector, and an incremental evaluator of
// the computation graph over those groups. Private to the core library.

#include <span>
#include <vector>

#include "spocc/dendrogram.hpp"
#include "spocc/ensemble.hpp"
#include "spocc/estimation.hpp"

namespace spocc::detail {

struct CellTable {
  std::size_t classifiers = 0;
  std::size_t labels = 0;
  /// cells x K prediction vectors, in first-seen order.
  std::vector<Label> preds;
  /// cells x l counts of true labels.
  std::vector<double> truth_counts;
  double total = 0.0;

  std::size_t size() const noexcept { return classifiers ? preds.size() / classifiers : 0; }
  std::span<const Label> cell(std::size_t c) const {
    return {preds.data() + c * classifiers, classifiers};
  }
  std::span<const double> counts(std::size_t c) const {
    return {truth_counts.data() + c * labels, labels};
  }
};

CellTable group_cells(const ValidationTable& table);
CellTable group_cells(const ValidationTable& table, std::span<const std::size_t> rows);

/// Expected number of correct predictions among `truth_counts` rows when the
/// label is drawn uniformly from the argmax set of `scores`.
double expected_correct(std::span<const double> scores, std::span<const double> truth_counts);

/// Evaluates J_{G;lambda} on every cell, recomputing only nodes whose lambda (or
/// a descendant's) changed since the last call.
class GraphEvaluator {
 public:
  GraphEvaluator(const Dendrogram& g, LambdaArray lambdas, const PossibilityTables& tables,
                 const CellTable& cells);

  void set(std::size_t node, TNormParam lambda);
  TNormParam get(std::size_t node) const { return lambdas_[node]; }
  const LambdaArray& lambdas() const noexcept { return lambdas_; }

  /// Expected accuracy over all cells.
  double accuracy();

 private:
  void refresh();
  std::span<const double> value(NodeRef ref, std::size_t cell) const;

  const Dendrogram& g_;
  LambdaArray lambdas_;
  const PossibilityTables& tables_;
  const CellTable& cells_;
  std::size_t width_;
  std::vector<std::vector<double>> values_;
  std::vector<bool> dirty_;
};

}  // namespace spocc::detail
