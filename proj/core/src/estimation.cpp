#include "spocc/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spocc {

ValidationTable::ValidationTable(LabelSpace labels, std::size_t classifiers,
                                 std::vector<Label> predictions, std::vector<Label> truths)
    : labels_(std::move(labels)),
      classifiers_(classifiers),
      predictions_(std::move(predictions)),
      truths_(std::move(truths)) {
  if (classifiers_ == 0) throw std::invalid_argument("validation table needs a classifier");
  if (truths_.empty()) throw std::invalid_argument("validation table needs a row");
  if (predictions_.size() != truths_.size() * classifiers_)
    throw std::invalid_argument("validation table: prediction count does not match rows x K");
  const auto limit = labels_.size();
  for (Label l : predictions_)
    if (l >= limit) throw std::invalid_argument("validation table: prediction label out of range");
  for (Label l : truths_)
    if (l >= limit) throw std::invalid_argument("validation table: true label out of range");
}

std::vector<Label> ValidationTable::column(std::size_t k) const {
  if (k >= classifiers_) throw std::out_of_range("classifier index out of range");
  std::vector<Label> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = prediction(i, k);
  return out;
}

bool ValidationTable::columns_equal(std::size_t k1, std::size_t k2) const {
  for (std::size_t i = 0; i < rows(); ++i)
    if (prediction(i, k1) != prediction(i, k2)) return false;
  return true;
}

ValidationTable ValidationTable::select_rows(std::span<const std::size_t> rows) const {
  std::vector<Label> preds;
  std::vector<Label> truths;
  preds.reserve(rows.size() * classifiers_);
  truths.reserve(rows.size());
  for (std::size_t r : rows) {
    auto row_preds = row(r);
    preds.insert(preds.end(), row_preds.begin(), row_preds.end());
    truths.push_back(truth(r));
  }
  return ValidationTable(labels_, classifiers_, std::move(preds), std::move(truths));
}

ValidationTable ValidationTable::select_columns(std::span<const std::size_t> columns) const {
  std::vector<Label> preds;
  preds.reserve(rows() * columns.size());
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t k : columns) {
      if (k >= classifiers_) throw std::out_of_range("classifier index out of range");
      preds.push_back(prediction(i, k));
    }
  return ValidationTable(labels_, columns.size(), std::move(preds),
                         std::vector<Label>(truths_.begin(), truths_.end()));
}

ValidationTable ValidationTable::with_column(std::span<const Label> column) const {
  if (column.size() != rows()) throw std::invalid_argument("appended column has wrong length");
  std::vector<Label> preds;
  preds.reserve(rows() * (classifiers_ + 1));
  for (std::size_t i = 0; i < rows(); ++i) {
    auto row_preds = row(i);
    preds.insert(preds.end(), row_preds.begin(), row_preds.end());
    preds.push_back(column[i]);
  }
  return ValidationTable(labels_, classifiers_ + 1, std::move(preds),
                         std::vector<Label>(truths_.begin(), truths_.end()));
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < labels_; ++i) t += counts_[i * labels_ + i];
  return t;
}

std::uint64_t ConfusionMatrix::column_total(Label predicted) const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < labels_; ++i) t += at(static_cast<Label>(i), predicted);
  return t;
}

std::uint64_t ConfusionMatrix::row_total(Label truth) const {
  std::uint64_t t = 0;
  for (std::size_t j = 0; j < labels_; ++j) t += at(truth, static_cast<Label>(j));
  return t;
}

void DependenceMatrix::set(std::size_t a, std::size_t b, double value) {
  d_[a * size_ + b] = value;
  d_[b * size_ + a] = value;
}

ConfusionMatrix confusion_matrix(const ValidationTable& table, std::size_t k) {
  if (k >= table.classifiers()) throw std::out_of_range("classifier index out of range");
  ConfusionMatrix m(table.label_count());
  for (std::size_t i = 0; i < table.rows(); ++i) ++m.at(table.truth(i), table.prediction(i, k));
  return m;
}

ProbabilityDistribution conditional_posterior(const ConfusionMatrix& m, Label predicted) {
  const std::size_t l = m.labels();
  const double denom = static_cast<double>(m.column_total(predicted)) + static_cast<double>(l);
  ProbabilityDistribution p(l);
  for (std::size_t i = 0; i < l; ++i)
    p[i] = (static_cast<double>(m.at(static_cast<Label>(i), predicted)) + 1.0) / denom;
  return p;
}

double error_rate(const ConfusionMatrix& m) {
  const auto total = m.total();
  if (total == 0) throw std::invalid_argument("error_rate: empty confusion matrix");
  return static_cast<double>(total - m.trace()) / static_cast<double>(total);
}

double dependence_kappa(std::span<const Label> a, std::span<const Label> b, std::size_t labels,
                        KappaOptions options) {
  const std::size_t n = a.size();
  if (n == 0) throw std::invalid_argument("dependence_kappa: empty table");
  if (b.size() != n) throw std::invalid_argument("dependence_kappa: column length mismatch");

  std::vector<double> ca(labels, 0.0), cb(labels, 0.0), joint(labels * labels, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    joint[a[i] * labels + b[i]] += 1.0;
  }
  const double nn = static_cast<double>(n);
  const double s = options.smoothed ? 1.0 : 0.0;
  const double l = static_cast<double>(labels);

  // Sums over rows grouped by cell: each row contributes log p-hat of its cell.
  double log_l0 = 0.0;
  for (std::size_t j = 0; j < labels; ++j) {
    if (ca[j] > 0) log_l0 += ca[j] * std::log((ca[j] + s) / (nn + s * l));
    if (cb[j] > 0) log_l0 += cb[j] * std::log((cb[j] + s) / (nn + s * l));
  }
  double log_l1 = 0.0;
  for (double c : joint)
    if (c > 0) log_l1 += c * std::log((c + s) / (nn + s * l * l));

  return 1.0 - std::exp(-std::abs(log_l0 - log_l1) / nn);
}

double dependence_kappa(const ValidationTable& table, std::size_t k, std::size_t k2,
                        KappaOptions options) {
  if (k >= table.classifiers() || k2 >= table.classifiers())
    throw std::out_of_range("classifier index out of range");
  const auto a = table.column(k);
  const auto b = table.column(k2);
  return dependence_kappa(a, b, table.label_count(), options);
}

double self_kappa(std::span<const Label> column, std::size_t labels, KappaOptions options) {
  return dependence_kappa(column, column, labels, options);
}

DependenceMatrix build_dissimilarity(const ValidationTable& table, KappaOptions options) {
  const std::size_t K = table.classifiers();
  if (K < 2) throw std::invalid_argument("build_dissimilarity: need at least two classifiers");
  std::vector<std::vector<Label>> columns;
  columns.reserve(K);
  for (std::size_t k = 0; k < K; ++k) columns.push_back(table.column(k));
  DependenceMatrix d(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t k2 = k + 1; k2 < K; ++k2)
      d.set(k, k2, 1.0 - dependence_kappa(columns[k], columns[k2], table.label_count(), options));
  return d;
}

std::vector<Label> rectify_map(const ConfusionMatrix& m) {
  std::vector<Label> h(m.labels());
  for (std::size_t j = 0; j < m.labels(); ++j) {
    const auto p = conditional_posterior(m, static_cast<Label>(j));
    h[j] = static_cast<Label>(std::max_element(p.begin(), p.end()) - p.begin());
  }
  return h;
}

double rectified_error_rate(const ConfusionMatrix& m) {
  const auto total = m.total();
  if (total == 0) throw std::invalid_argument("rectified_error_rate: empty confusion matrix");
  const auto h = rectify_map(m);
  std::uint64_t right = 0;
  for (std::size_t j = 0; j < m.labels(); ++j) right += m.at(h[j], static_cast<Label>(j));
  return static_cast<double>(total - right) / static_cast<double>(total);
}

}  // namespace spocc
