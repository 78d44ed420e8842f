#pragma once

// A trained aggregator of any method behind one interface, and its JSON form.

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "spocc/baselines.hpp"
#include "spocc/ensemble.hpp"
#include "spocc/methods.hpp"

namespace spocc {

inline constexpr std::string_view kModelFormat = "spocc-model/1";

struct SelectionModel {
  LabelSpace labels;
  std::size_t classifiers = 0;
  std::size_t selected = 0;
  std::vector<double> accuracies;

  /// One-hot on the selected classifier's prediction.
  std::vector<double> scores(std::span<const Label> preds) const;
};

struct TrainOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  /// T-norm parameter of flat SPOCC.
  TNormParam flat_lambda{5.0};
};

class Model {
 public:
  using Body = std::variant<SelectionModel, VoteModel, StackingModel, NaiveBayesModel,
                            BayesAggModel, SpoccModel>;

  /// Throws std::invalid_argument when the body does not fit the method.
  Model(Method method, Body body);

  Method method() const noexcept { return method_; }
  const Body& body() const noexcept { return body_; }
  const LabelSpace& labels() const;
  std::size_t classifiers() const;

  /// Per-label scores whose argmax set is the method's decision.
  std::vector<double> scores(std::span<const Label> preds) const;
  /// Argmax of scores(), ties broken uniformly with `rng`.
  Label predict(std::span<const Label> preds, std::mt19937_64& rng) const;

 private:
  Method method_;
  Body body_;
};

/// Throws std::invalid_argument for the reference methods (best-base, optimal)
/// and IntractableError when Bayes aggregation exceeds its cell cap.
Model train_model(Method method, const ValidationTable& table, const TrainOptions& options = {});

std::string model_to_json(const Model& model);
/// Throws ParseError for malformed documents or an unknown format version.
Model model_from_json(std::string_view text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// Nodes with ids (leaves 0..K-1, internal node a as K + a), children, merge
/// heights and per-node lambda ("inf" for the minimum t-norm).
std::string dendrogram_to_json(const Dendrogram& tree, std::span<const TNormParam> lambdas);
std::pair<Dendrogram, LambdaArray> dendrogram_from_json(std::string_view text);

}  // namespace spocc
