#include "spocc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "cells.hpp"
#include "spocc/error.hpp"

namespace spocc {

namespace {

void check_preds(std::span<const Label> preds, std::size_t classifiers, std::size_t labels) {
  if (preds.size() != classifiers)
    throw std::invalid_argument("prediction vector length does not match the ensemble size");
  for (Label p : preds)
    if (p >= labels) throw std::out_of_range("predicted label out of range");
}

std::vector<double> column_accuracies(const ValidationTable& table,
                                      std::span<const std::size_t> rows) {
  std::vector<double> acc(table.classifiers(), 0.0);
  for (std::size_t r : rows)
    for (std::size_t k = 0; k < table.classifiers(); ++k)
      if (table.prediction(r, k) == table.truth(r)) acc[k] += 1.0;
  for (double& a : acc) a /= static_cast<double>(rows.size());
  return acc;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

}  // namespace

std::vector<double> accuracies(const ValidationTable& table) {
  if (table.rows() == 0) throw std::invalid_argument("accuracies: empty table");
  return column_accuracies(table, all_rows(table.rows()));
}

std::size_t select_best(const ValidationTable& table) {
  const auto acc = accuracies(table);
  return static_cast<std::size_t>(std::max_element(acc.begin(), acc.end()) - acc.begin());
}

std::vector<double> vote_scores(std::span<const double> weights, std::span<const Label> preds,
                                std::size_t labels) {
  if (weights.size() != preds.size()) throw std::invalid_argument("one weight per vote required");
  std::vector<double> s(labels, 0.0);
  for (std::size_t k = 0; k < preds.size(); ++k) {
    if (preds[k] >= labels) throw std::out_of_range("predicted label out of range");
    s[preds[k]] += weights[k];
  }
  return s;
}

Label weighted_vote(std::span<const double> weights, std::span<const Label> preds,
                    std::size_t labels, std::mt19937_64& rng) {
  return decide(vote_scores(weights, preds, labels), rng);
}

std::vector<double> softmax_weights(std::span<const double> acc, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (acc.empty()) return {};
  const double top = *std::max_element(acc.begin(), acc.end());
  std::vector<double> w(acc.size());
  double z = 0.0;
  for (std::size_t k = 0; k < acc.size(); ++k) z += w[k] = std::exp((acc[k] - top) / temperature);
  for (double& v : w) v /= z;
  return w;
}

Label exp_weighted_vote(std::span<const double> acc, double temperature,
                        std::span<const Label> preds, std::size_t labels, std::mt19937_64& rng) {
  return weighted_vote(softmax_weights(acc, temperature), preds, labels, rng);
}

double tune_temperature(const ValidationTable& table, const GridSpec& grid, std::size_t folds,
                        std::uint64_t seed) {
  for (double t : grid.points())
    if (!(t > 0.0) || std::isinf(t)) throw std::invalid_argument("temperature grid must be finite and positive");
  const auto held_out = make_folds(table.rows(), folds, seed);
  std::vector<double> mean_acc(grid.size(), 0.0);
  for (const auto& fold : held_out) {
    const auto acc = column_accuracies(table, training_rows(table.rows(), fold, folds));
    const auto cells = detail::group_cells(table, fold);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto w = softmax_weights(acc, grid[g]);
      double correct = 0.0;
      for (std::size_t c = 0; c < cells.size(); ++c)
        correct += detail::expected_correct(vote_scores(w, cells.cell(c), cells.labels),
                                            cells.counts(c));
      mean_acc[g] += correct / cells.total / static_cast<double>(folds);
    }
  }
  const auto best = std::max_element(mean_acc.begin(), mean_acc.end());
  return grid[static_cast<std::size_t>(best - mean_acc.begin())];
}

std::vector<double> VoteModel::scores(std::span<const Label> preds) const {
  check_preds(preds, weights.size(), labels.size());
  return vote_scores(weights, preds, labels.size());
}

Label VoteModel::predict(std::span<const Label> preds, std::mt19937_64& rng) const {
  return decide(scores(preds), rng);
}

VoteModel train_weighted_vote(const ValidationTable& table) {
  VoteModel m;
  m.labels = table.labels();
  m.accuracies = accuracies(table);
  m.weights = m.accuracies;
  return m;
}

VoteModel train_exp_weighted_vote(const ValidationTable& table, const GridSpec& grid,
                                  std::size_t folds, std::uint64_t seed) {
  VoteModel m;
  m.labels = table.labels();
  m.accuracies = accuracies(table);
  m.temperature = tune_temperature(table, grid, folds, seed);
  m.weights = softmax_weights(m.accuracies, m.temperature);
  return m;
}

std::vector<double> NaiveBayesModel::log_scores(std::span<const Label> preds) const {
  const std::size_t l = labels.size();
  check_preds(preds, classifiers, l);
  std::vector<double> s = log_prior;
  for (std::size_t k = 0; k < classifiers; ++k)
    for (std::size_t y = 0; y < l; ++y) s[y] += log_likelihood[(k * l + y) * l + preds[k]];
  return s;
}

std::vector<double> NaiveBayesModel::posterior(std::span<const Label> preds) const {
  auto s = log_scores(preds);
  const double top = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double& v : s) z += v = std::exp(v - top);
  for (double& v : s) v /= z;
  return s;
}

Label NaiveBayesModel::predict(std::span<const Label> preds, std::mt19937_64& rng) const {
  return decide(log_scores(preds), rng);
}

NaiveBayesModel naive_bayes_train(const ValidationTable& table) {
  if (table.rows() == 0) throw std::invalid_argument("naive_bayes_train: empty table");
  const std::size_t l = table.label_count(), K = table.classifiers();
  NaiveBayesModel m;
  m.labels = table.labels();
  m.classifiers = K;
  std::vector<double> class_counts(l, 0.0);
  for (Label y : table.truths()) class_counts[y] += 1.0;
  m.log_prior.resize(l);
  for (std::size_t y = 0; y < l; ++y)
    m.log_prior[y] = std::log((class_counts[y] + 1.0) / (static_cast<double>(table.rows()) + l));
  m.log_likelihood.assign(K * l * l, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const auto cm = confusion_matrix(table, k);
    for (std::size_t y = 0; y < l; ++y)
      for (std::size_t j = 0; j < l; ++j)
        m.log_likelihood[(k * l + y) * l + j] =
            std::log((static_cast<double>(cm.at(static_cast<Label>(y), static_cast<Label>(j))) + 1.0) /
                     (class_counts[y] + static_cast<double>(l)));
  }
  return m;
}

Label naive_bayes_predict(const NaiveBayesModel& model, std::span<const Label> preds,
                          std::mt19937_64& rng) {
  return model.predict(preds, rng);
}

std::uint64_t BayesAggModel::cell_index(std::span<const Label> preds) const {
  check_preds(preds, classifiers, labels.size());
  std::uint64_t idx = 0;
  for (Label p : preds) idx = idx * labels.size() + p;
  return idx;
}

std::vector<double> BayesAggModel::posterior(std::span<const Label> preds) const {
  const std::size_t l = labels.size();
  std::vector<double> p(l, 1.0 / static_cast<double>(l));
  auto it = counts.find(cell_index(preds));
  if (it == counts.end()) return p;
  double n = 0.0;
  for (auto c : it->second) n += static_cast<double>(c);
  for (std::size_t y = 0; y < l; ++y)
    p[y] = (static_cast<double>(it->second[y]) + 1.0) / (n + static_cast<double>(l));
  return p;
}

Label BayesAggModel::predict(std::span<const Label> preds, std::mt19937_64& rng) const {
  return decide(posterior(preds), rng);
}

BayesAggModel bayes_agg_train(const ValidationTable& table, std::uint64_t cell_cap) {
  const std::size_t l = table.label_count(), K = table.classifiers();
  std::uint64_t cells = 1;
  for (std::size_t k = 0; k < K; ++k) {
    if (cells > cell_cap / l)
      throw IntractableError("Bayes aggregation needs " + std::to_string(l) + "^" +
                             std::to_string(K) + " cells, above the cap of " +
                             std::to_string(cell_cap));
    cells *= l;
  }
  BayesAggModel m;
  m.labels = table.labels();
  m.classifiers = K;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    auto& c = m.counts[m.cell_index(table.row(i))];
    if (c.empty()) c.assign(l, 0);
    ++c[table.truth(i)];
  }
  return m;
}

Label bayes_agg_predict(const BayesAggModel& model, std::span<const Label> preds,
                        std::mt19937_64& rng) {
  return model.predict(preds, rng);
}

namespace {

void one_hot(std::span<const Label> preds, std::size_t labels, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < preds.size(); ++k) out[k * labels + preds[k]] = 1.0;
}

SoftmaxProblem problem_from_rows(const ValidationTable& table, std::span<const std::size_t> rows,
                                 double l2) {
  const std::size_t l = table.label_count(), K = table.classifiers();
  SoftmaxProblem p;
  p.features = K * l;
  p.classes = l;
  p.l2 = l2;
  std::map<std::pair<std::vector<Label>, Label>, std::size_t> seen;
  std::vector<double> feat(p.features);
  for (std::size_t r : rows) {
    auto row = table.row(r);
    auto [it, inserted] =
        seen.try_emplace({std::vector<Label>(row.begin(), row.end()), table.truth(r)}, p.rows());
    if (inserted) {
      one_hot(row, l, feat);
      p.x.insert(p.x.end(), feat.begin(), feat.end());
      p.y.push_back(table.truth(r));
      p.weight.push_back(0.0);
    }
    p.weight[it->second] += 1.0;
  }
  return p;
}

StackingModel make_stacking(const ValidationTable& table, double l2, SoftmaxFit fit) {
  StackingModel m;
  m.labels = table.labels();
  m.classifiers = table.classifiers();
  m.l2 = l2;
  m.coefficients = std::move(fit.coefficients);
  m.converged = fit.converged;
  m.iterations = fit.iterations;
  return m;
}

}  // namespace

SoftmaxProblem stacking_problem(const ValidationTable& table, double l2) {
  return problem_from_rows(table, all_rows(table.rows()), l2);
}

StackingModel stacking_fit(const ValidationTable& table, double l2, const SoftmaxFitOptions& fit,
                           std::span<const double> start) {
  if (!(l2 >= 0.0)) throw std::invalid_argument("l2 must be non-negative");
  return make_stacking(table, l2, fit_softmax(stacking_problem(table, l2), start, fit));
}

std::vector<double> StackingModel::scores(std::span<const Label> preds) const {
  const std::size_t l = labels.size();
  check_preds(preds, classifiers, l);
  std::vector<double> feat(classifiers * l), s(l);
  one_hot(preds, l, feat);
  softmax_scores(coefficients, feat, l, s);
  return s;
}

Label StackingModel::predict(std::span<const Label> preds, std::mt19937_64& rng) const {
  return decide(scores(preds), rng);
}

StackingModel stacking_train(const ValidationTable& table, const StackingOptions& options) {
  const auto& grid = options.l2_grid;
  for (double v : grid.points())
    if (!(v >= 0.0) || std::isinf(v)) throw std::invalid_argument("l2 grid must be finite and >= 0");
  const std::size_t l = table.label_count();
  const auto held_out = make_folds(table.rows(), options.folds, options.seed);
  std::vector<double> mean_acc(grid.size(), 0.0);
  for (const auto& fold : held_out) {
    auto problem = problem_from_rows(table, training_rows(table.rows(), fold, options.folds), 0.0);
    const auto cells = detail::group_cells(table, fold);
    std::vector<double> w;
    std::vector<double> feat(problem.features), s(l);
    // Regularization path from strong to weak, each fit warm-started from the last.
    for (std::size_t g = grid.size(); g-- > 0;) {
      problem.l2 = grid[g];
      w = fit_softmax(problem, w, options.fit).coefficients;
      double correct = 0.0;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        one_hot(cells.cell(c), l, feat);
        softmax_scores(w, feat, l, s);
        correct += detail::expected_correct(s, cells.counts(c));
      }
      mean_acc[g] += correct / cells.total / static_cast<double>(options.folds);
    }
  }
  const auto best = std::max_element(mean_acc.begin(), mean_acc.end());
  const double l2 = grid[static_cast<std::size_t>(best - mean_acc.begin())];
  return stacking_fit(table, l2, options.fit);
}

Label stacking_predict(const StackingModel& model, std::span<const Label> preds,
                       std::mt19937_64& rng) {
  return model.predict(preds, rng);
}

}  // namespace spocc
