#pragma once

// Frequentist estimates computed from a validation table of base-classifier
// predictions: confusion matrices, smoothed posteriors, error rates, the
// pairwise dependence level kappa and classifier rectification.

#include <cstdint>
#include <span>
#include <vector>

#include "spocc/label_space.hpp"
#include "spocc/possibility.hpp"

namespace spocc {

/// n_val x K predicted labels plus the true label of each validation row.
/// Column order fixes classifier identity.
class ValidationTable {
 public:
  ValidationTable() = default;

  /// `predictions` is row-major (row i, classifier k at i * K + k).
  /// Throws std::invalid_argument on shape or label-range violations.
  ValidationTable(LabelSpace labels, std::size_t classifiers, std::vector<Label> predictions,
                  std::vector<Label> truths);

  const LabelSpace& labels() const noexcept { return labels_; }
  std::size_t label_count() const noexcept { return labels_.size(); }
  std::size_t rows() const noexcept { return truths_.size(); }
  std::size_t classifiers() const noexcept { return classifiers_; }

  Label prediction(std::size_t row, std::size_t k) const {
    return predictions_[row * classifiers_ + k];
  }
  std::span<const Label> row(std::size_t i) const {
    return {predictions_.data() + i * classifiers_, classifiers_};
  }
  Label truth(std::size_t row) const { return truths_[row]; }
  std::span<const Label> truths() const noexcept { return truths_; }

  std::vector<Label> column(std::size_t k) const;
  bool columns_equal(std::size_t k1, std::size_t k2) const;

  /// Table restricted to the given rows (in the given order).
  ValidationTable select_rows(std::span<const std::size_t> rows) const;
  /// Table restricted to the given classifier columns (in the given order).
  ValidationTable select_columns(std::span<const std::size_t> columns) const;
  /// Table with one more prediction column appended on the right.
  ValidationTable with_column(std::span<const Label> column) const;

 private:
  LabelSpace labels_;
  std::size_t classifiers_ = 0;
  std::vector<Label> predictions_;
  std::vector<Label> truths_;
};

/// l x l counts; row = true label, column = predicted label.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t labels = 0)
      : labels_(labels), counts_(labels * labels, 0) {}

  std::size_t labels() const noexcept { return labels_; }
  std::uint64_t& at(Label truth, Label predicted) { return counts_[truth * labels_ + predicted]; }
  std::uint64_t at(Label truth, Label predicted) const {
    return counts_[truth * labels_ + predicted];
  }
  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;
  std::uint64_t column_total(Label predicted) const;
  std::uint64_t row_total(Label truth) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t labels_;
  std::vector<std::uint64_t> counts_;
};

/// K x K symmetric dissimilarities 1 - kappa with a zero diagonal.
class DependenceMatrix {
 public:
  explicit DependenceMatrix(std::size_t size = 0) : size_(size), d_(size * size, 0.0) {}

  std::size_t size() const noexcept { return size_; }
  double operator()(std::size_t a, std::size_t b) const { return d_[a * size_ + b]; }
  /// Writes both (a, b) and (b, a).
  void set(std::size_t a, std::size_t b, double value);

 private:
  std::size_t size_;
  std::vector<double> d_;
};

ConfusionMatrix confusion_matrix(const ValidationTable& table, std::size_t k);

/// Add-one smoothed p(Y = . | c_k = j) from column j.
ProbabilityDistribution conditional_posterior(const ConfusionMatrix& m, Label predicted);

/// (total - trace) / total. Throws std::invalid_argument for an empty matrix.
double error_rate(const ConfusionMatrix& m);

struct KappaOptions {
  /// Add-one smoothing of marginals (l cells) and joint (l^2 cells).
  bool smoothed = true;
};

/// 1 - exp(-|log L0 - log L1| / n_val) with both likelihoods evaluated in log space.
double dependence_kappa(const ValidationTable& table, std::size_t k, std::size_t k2,
                        KappaOptions options = {});

/// Dependence level of a prediction column with a copy of itself: the largest
/// kappa any partner of that column can reach.
double self_kappa(std::span<const Label> column, std::size_t labels, KappaOptions options = {});

/// Dependence level between two raw prediction columns.
double dependence_kappa(std::span<const Label> a, std::span<const Label> b, std::size_t labels,
                        KappaOptions options = {});

/// Throws std::invalid_argument when the table has fewer than two classifiers.
DependenceMatrix build_dissimilarity(const ValidationTable& table, KappaOptions options = {});

/// h(j) = argmax_i p(Y = i | c = j), ties to the lowest label.
std::vector<Label> rectify_map(const ConfusionMatrix& m);

/// Error rate of h o c on the same rows: never above error_rate(m).
double rectified_error_rate(const ConfusionMatrix& m);

}  // namespace spocc
