#pragma once

// Comparison aggregators trained from the same validation table as SPOCC:
// classifier selection, accuracy-weighted votes, naive Bayes, full Bayes
// aggregation over prediction cells, and stacking.

#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "spocc/estimation.hpp"
#include "spocc/grid.hpp"
#include "spocc/softmax.hpp"

namespace spocc {

/// 1 - error rate of every column.
std::vector<double> accuracies(const ValidationTable& table);

/// Column with the lowest validation error; ties to the lowest index.
std::size_t select_best(const ValidationTable& table);

/// Per-label sum of the weights of the classifiers voting for it.
std::vector<double> vote_scores(std::span<const double> weights, std::span<const Label> preds,
                                std::size_t labels);

/// Argmax of vote_scores, ties broken uniformly with `rng`.
Label weighted_vote(std::span<const double> weights, std::span<const Label> preds,
                    std::size_t labels, std::mt19937_64& rng);

/// w_k proportional to exp(acc_k / temperature). Small temperatures approach
/// selection of the most accurate classifier, large ones a uniform vote.
/// Throws std::invalid_argument for temperature <= 0.
std::vector<double> softmax_weights(std::span<const double> accuracies, double temperature);

Label exp_weighted_vote(std::span<const double> accuracies, double temperature,
                        std::span<const Label> preds, std::size_t labels, std::mt19937_64& rng);

/// Cross-validated temperature maximizing expected held-out vote accuracy.
/// Ties go to the smallest temperature.
double tune_temperature(const ValidationTable& table, const GridSpec& grid, std::size_t folds,
                        std::uint64_t seed);

struct VoteModel {
  LabelSpace labels;
  std::vector<double> accuracies;
  std::vector<double> weights;
  /// Set for the exponential variant.
  double temperature = 0.0;

  std::vector<double> scores(std::span<const Label> preds) const;
  Label predict(std::span<const Label> preds, std::mt19937_64& rng) const;
};

VoteModel train_weighted_vote(const ValidationTable& table);
VoteModel train_exp_weighted_vote(const ValidationTable& table,
                                  const GridSpec& grid = default_temperature_grid(),
                                  std::size_t folds = 5, std::uint64_t seed = 0);

struct NaiveBayesModel {
  LabelSpace labels;
  std::size_t classifiers = 0;
  /// log p(y), add-one smoothed.
  std::vector<double> log_prior;
  /// log p(c_k = j | y) at [(k * l + y) * l + j], add-one smoothed per (k, y).
  std::vector<double> log_likelihood;

  std::vector<double> log_scores(std::span<const Label> preds) const;
  /// Normalized posterior p(y | preds).
  std::vector<double> posterior(std::span<const Label> preds) const;
  Label predict(std::span<const Label> preds, std::mt19937_64& rng) const;
};

NaiveBayesModel naive_bayes_train(const ValidationTable& table);
Label naive_bayes_predict(const NaiveBayesModel& model, std::span<const Label> preds,
                          std::mt19937_64& rng);

inline constexpr std::uint64_t kDefaultBayesCellCap = 10'000'000;

struct BayesAggModel {
  LabelSpace labels;
  std::size_t classifiers = 0;
  /// Observed truth counts per prediction cell; unseen cells are implicit zeros.
  std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> counts;

  std::uint64_t cell_index(std::span<const Label> preds) const;
  /// Add-one smoothed p(y | cell); uniform for an unseen cell.
  std::vector<double> posterior(std::span<const Label> preds) const;
  Label predict(std::span<const Label> preds, std::mt19937_64& rng) const;
};

/// Throws IntractableError when l^K exceeds `cell_cap`.
BayesAggModel bayes_agg_train(const ValidationTable& table,
                              std::uint64_t cell_cap = kDefaultBayesCellCap);
Label bayes_agg_predict(const BayesAggModel& model, std::span<const Label> preds,
                        std::mt19937_64& rng);

struct StackingModel {
  LabelSpace labels;
  std::size_t classifiers = 0;
  double l2 = 0.0;
  /// (K * l + 1) x l over one-hot encoded predictions plus bias.
  std::vector<double> coefficients;
  bool converged = true;
  std::size_t iterations = 0;

  std::vector<double> scores(std::span<const Label> preds) const;
  Label predict(std::span<const Label> preds, std::mt19937_64& rng) const;
};

struct StackingOptions {
  GridSpec l2_grid = default_l2_grid();
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  SoftmaxFitOptions fit;
};

/// One-hot design over the table rows; identical (predictions, truth) rows are
/// merged into a single weighted row.
SoftmaxProblem stacking_problem(const ValidationTable& table, double l2);

/// Fit at a fixed regularization strength.
StackingModel stacking_fit(const ValidationTable& table, double l2,
                           const SoftmaxFitOptions& fit = {}, std::span<const double> start = {});

/// Cross-validated choice of l2 (ties to the smallest), then a fit on all rows.
StackingModel stacking_train(const ValidationTable& table, const StackingOptions& options = {});
Label stacking_predict(const StackingModel& model, std::span<const Label> preds,
                       std::mt19937_64& rng);

}  // namespace spocc
