#pragma once

// SPOCC and adaSPOCC: conditional possibility tables estimated from a
// validation table, combined with Aczel-Alsina t-norms either flat (SPOCC) or
// along a dependence dendrogram with per-classifier discounting (adaSPOCC).

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "spocc/dendrogram.hpp"
#include "spocc/estimation.hpp"
#include "spocc/grid.hpp"
#include "spocc/possibility.hpp"

namespace spocc {

enum class SpoccMode { flat, adaptive };

/// pi_{k|j} for every classifier k and predicted label j.
using PossibilityTables = std::vector<std::vector<PossibilityDistribution>>;

struct SpoccModel {
  LabelSpace labels;
  SpoccMode mode = SpoccMode::flat;
  /// DPT of the smoothed conditionals, before discounting.
  PossibilityTables base_tables;
  /// base_tables discounted by `alphas`; what prediction uses.
  PossibilityTables tables;
  std::vector<double> error_rates;
  /// Error rates after rectification; these drive the discounting rule, so an
  /// adversarial member is weighed like its rectified counterpart.
  std::vector<double> rectified_error_rates;
  std::vector<double> alphas;
  /// Discount exponent in [0, +inf].
  double rho = 0.0;
  /// T-norm of flat mode.
  TNormParam flat_lambda{5.0};
  /// Adaptive mode only.
  std::optional<Dendrogram> dendrogram;
  LambdaArray lambdas;
  /// Number of flat clusters the dependence search settled on.
  std::size_t cluster_count = 1;

  std::size_t classifiers() const noexcept { return base_tables.size(); }
  std::size_t label_count() const noexcept { return labels.size(); }

  /// Aggregated distribution for one prediction vector (either mode).
  PossibilityDistribution aggregate(std::span<const Label> preds) const;
  Label predict(std::span<const Label> preds, std::mt19937_64& rng) const;
};

/// DPT tables from add-one smoothed column posteriors of every classifier.
PossibilityTables possibility_tables(const ValidationTable& table);
std::vector<double> error_rates(const ValidationTable& table);
std::vector<double> rectified_error_rates(const ValidationTable& table);
PossibilityTables discount_tables(const PossibilityTables& base, std::span<const double> alphas);

/// Flat SPOCC training. Alphas are zero; flat_lambda defaults to T_5.
/// Throws std::invalid_argument for an empty table.
SpoccModel train_spocc(const ValidationTable& table, TNormParam flat_lambda = TNormParam(5.0));

/// decide(T_flat(pi_{k|preds[k]})). Throws std::invalid_argument on a mode or
/// shape mismatch, std::out_of_range for labels outside the label space.
Label predict_spocc(const SpoccModel& model, std::span<const Label> preds, std::mt19937_64& rng);

/// alpha_k = 1 - ((1 - r_k) / (1 - min r))^rho; the best classifier keeps alpha = 0.
/// rho = +inf discounts every non-best classifier completely. When every error
/// rate is 1 the lowest-index classifier keeps alpha = 0 and the rest get 1.
std::vector<double> compute_alphas(std::span<const double> error_rates, double rho);

/// Expected validation accuracy of an aggregation structure when ties are
/// broken uniformly at random.
double expected_accuracy(const SpoccModel& model, const ValidationTable& table);

/// Cross-validated grid search for rho with the model's combination structure
/// (flat lambda or dendrogram + lambdas) held fixed. Ties go to the smaller rho.
/// Throws std::invalid_argument when the table has fewer rows than folds.
double tune_rho(const ValidationTable& table, const SpoccModel& structure, const GridSpec& grid,
                std::size_t folds, std::uint64_t seed);

struct LambdaSearchResult {
  LambdaArray lambdas;
  std::size_t cluster_count = 1;
  /// Validation error after each completed cluster-count iteration.
  std::vector<double> errors;
};

/// Grid-search heuristic over the dendrogram's lambdas: clusters are tuned
/// jointly (subtrees with at most two internal nodes) or bottom-up, remaining
/// nodes sequentially under the ancestor <= descendant constraint, iterating the
/// cluster count from 2 to K until the validation error stops improving.
/// Subtrees whose leaves have identical validation columns are pinned to +inf.
LambdaSearchResult heuristic_lambda_search(const ValidationTable& table, const Dendrogram& g,
                                           const GridSpec& grid);

struct AdaSpoccOptions {
  GridSpec lambda_grid = default_lambda_grid();
  GridSpec rho_grid = default_rho_grid();
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

/// Dendrogram over the classifiers: identical prediction columns are merged
/// first under chains of pinned nodes; the distinct columns go through HAC.
/// Returns the tree and which internal nodes are pinned duplicates.
struct DependenceTree {
  Dendrogram tree;
  std::vector<bool> pinned;
};
DependenceTree build_dependence_tree(const ValidationTable& table);

/// adaSPOCC training: SPOCC tables, dependence dendrogram, lambda search,
/// rho tuning, alphas and discounting.
SpoccModel train_adaspocc(const ValidationTable& table, const AdaSpoccOptions& options = {});

/// decide(J_{G;lambda}(pi_{k|preds[k]})). Throws std::invalid_argument unless
/// the model is adaptive.
Label predict_adaspocc(const SpoccModel& model, std::span<const Label> preds,
                       std::mt19937_64& rng);

struct AppendOptions {
  /// Join an existing cluster when the normalized dissimilarity is below this.
  double threshold = 0.5;
  GridSpec lambda_grid = default_lambda_grid();
};

struct AppendReport {
  bool joined = false;
  std::size_t sibling = 0;
  std::size_t node = 0;
  /// True when a new lambda was chosen by grid search.
  bool searched = false;
};

/// Add classifier K from the last column of `table` (whose first K columns must
/// be the model's classifiers) without re-estimating existing tables or lambdas.
/// Throws std::invalid_argument on a column-count or label-space mismatch.
SpoccModel append_classifier(const SpoccModel& model, const ValidationTable& table,
                             const AppendOptions& options = {}, AppendReport* report = nullptr);

/// 1 - kappa(a, b) / max(kappa(a, a), kappa(b, b)) clamped to [0, 1]; exactly 0
/// for identical columns and near 1 for independent ones.
double normalized_dissimilarity(std::span<const Label> a, std::span<const Label> b,
                                std::size_t labels);

}  // namespace spocc
