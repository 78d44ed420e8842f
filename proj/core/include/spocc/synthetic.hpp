#pragma once

// Synthetic two-class data from four Gaussian blobs on the corners of a square,
// subset-splitting protocols, small base learners and prediction perturbations.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "spocc/label_space.hpp"

namespace spocc {

/// Points with `dims` features each (row-major) and integer labels.
struct Dataset {
  std::size_t dims = 2;
  std::vector<double> x;
  std::vector<Label> y;

  std::size_t size() const noexcept { return y.size(); }
  std::span<const double> point(std::size_t i) const { return {x.data() + i * dims, dims}; }
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Blob centers at (+-c, +-c). Blobs at (c, c) and (-c, -c) carry label 0, the
/// other two label 1.
struct GaussianQuadrantConfig {
  double half_side = 1.5;
  double sigma = 1.0;
  std::size_t n = 200;
  /// p(label 0). Unset means the four blobs are equally likely.
  std::optional<double> beta;
};

Dataset generate(const GaussianQuadrantConfig& config, std::mt19937_64& rng);

/// Label of the Bayes-optimal classifier for the generating distribution.
Label optimal_label(const GaussianQuadrantConfig& config, std::span<const double> x);

/// Accuracy of sign(x1 * x2) on balanced data: Phi(c)^2 + (1 - Phi(c))^2 for sigma = 1.
double quadrant_rule_accuracy(double half_side, double sigma = 1.0);

/// Half-side c for which the sign(x1 * x2) rule reaches `target` accuracy
/// (sigma = 1), by bisection. Throws std::invalid_argument unless 0.5 < target < 1.
double calibrate_half_side(double target);

/// Quadrant 1..4 of a 2-D point (counter-clockwise from x1 >= 0, x2 >= 0).
int quadrant(std::span<const double> x);

/// Four overlapping subsets of `rows` (all rows when empty): subset k (1-based)
/// drops the points of the quadrant diagonally opposite quadrant k.
std::vector<std::vector<std::size_t>> split_overlapping(const Dataset& data,
                                                        std::span<const std::size_t> rows = {});

/// Per class: project on the leading principal direction, sort, cut into m
/// contiguous blocks (remainder to the last block); subset s gathers block s of
/// every class. Throws std::invalid_argument for m < 2 or a class with < m points.
std::vector<std::vector<std::size_t>> pca_split(const Dataset& data, std::size_t m);

struct TreeNode {
  /// -1 for a leaf.
  int feature = -1;
  double threshold = 0.0;
  Label label = 0;
  int left = -1;
  int right = -1;
};

struct BaseClassifier {
  enum class Kind { tree, logistic, knn };
  Kind kind = Kind::tree;
  std::size_t dims = 2;
  std::size_t labels = 2;
  /// Tree: node 0 is the root; x[feature] <= threshold goes left.
  std::vector<TreeNode> nodes;
  /// Logistic: (dims + 1) x labels coefficients.
  std::vector<double> coefficients;
  /// k-NN: stored training points.
  Dataset memory;
  std::size_t neighbors = 5;

  Label predict(std::span<const double> x) const;
};

/// Greedy Gini splits on midpoints between distinct sorted values, depth <= 2.
/// A single-class subset yields a constant classifier.
BaseClassifier train_depth2_tree(const Dataset& data, std::span<const std::size_t> rows,
                                 std::size_t labels = 2);
BaseClassifier train_logistic(const Dataset& data, std::span<const std::size_t> rows,
                              std::size_t labels = 2, double l2 = 1.0);
/// Euclidean majority vote of the nearest `neighbors` points; distance ties go
/// to the lower row index, vote ties to the lower label.
BaseClassifier train_knn(const Dataset& data, std::span<const std::size_t> rows,
                         std::size_t labels = 2, std::size_t neighbors = 5);

enum class PerturbationKind { adversarial, fault, clone };

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::clone;
  double theta = 0.0;
  std::size_t source = 0;
  std::size_t copies = 1;
};

/// With probability theta, replace `pred` by a uniform label different from it
/// (adversarial) or by a uniform label (fault). Clones return `pred`.
Label perturb_label(Label pred, PerturbationKind kind, double theta, std::size_t labels,
                    std::mt19937_64& rng);

std::vector<Label> perturb(std::span<const Label> column, const PerturbationSpec& spec,
                           std::mt19937_64& rng, std::size_t labels);

}  // namespace spocc
