#pragma once

// Weighted multinomial logistic regression with an L2 penalty, fitted by
// full-batch gradient descent. Shared by stacking and the logistic base learner.

#include <cstddef>
#include <span>
#include <vector>

#include "spocc/label_space.hpp"

namespace spocc {

/// Coefficients are stored row-major as (features + 1) x classes; the last row
/// is the unpenalized bias.
struct SoftmaxProblem {
  std::size_t features = 0;
  std::size_t classes = 0;
  /// rows x features, row-major.
  std::vector<double> x;
  std::vector<Label> y;
  /// Per-row weights; empty means every row counts once.
  std::vector<double> weight;
  double l2 = 0.0;

  std::size_t rows() const noexcept { return y.size(); }
  std::size_t coefficient_count() const noexcept { return (features + 1) * classes; }
};

/// Weighted mean cross-entropy plus l2 * ||non-bias coefficients||^2.
double softmax_objective(const SoftmaxProblem& problem, std::span<const double> coefficients);

/// Objective value; writes its gradient into `gradient`.
double softmax_objective_gradient(const SoftmaxProblem& problem,
                                  std::span<const double> coefficients,
                                  std::span<double> gradient);

struct SoftmaxFitOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 10000;
};

struct SoftmaxFit {
  std::vector<double> coefficients;
  double objective = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  /// False when the iteration cap was hit before the gradient tolerance.
  bool converged = false;
};

/// Gradient descent from `start` (zeros when empty). The first step is the
/// inverse of a curvature bound, later ones use the Barzilai-Borwein length;
/// a step is halved until it does not increase the objective, so the objective
/// never rises.
SoftmaxFit fit_softmax(const SoftmaxProblem& problem, std::span<const double> start = {},
                       const SoftmaxFitOptions& options = {});

/// Linear scores of one feature vector.
void softmax_scores(std::span<const double> coefficients, std::span<const double> features,
                    std::size_t classes, std::span<double> out);

}  // namespace spocc
