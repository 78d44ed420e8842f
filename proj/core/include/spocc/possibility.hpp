#pragma once

// Possibility distributions over a finite label set, the Dubois-Prade
// probability-to-possibility transform, Aczel-Alsina t-norms and discounting.

#include <limits>
#include <random>
#include <span>
#include <vector>

#include "spocc/label_space.hpp"

namespace spocc {

using ProbabilityDistribution = std::vector<double>;
using PossibilityDistribution = std::vector<double>;

/// Values below this floor are treated as exact zeros before taking logs.
inline constexpr double kPossibilityFloor = 1e-300;
/// A distribution is normalized when its max entry is at least 1 - kNormalizationTolerance.
inline constexpr double kNormalizationTolerance = 1e-9;
/// Allowed deviation of a probability vector's sum from 1.
inline constexpr double kProbabilitySumTolerance = 1e-9;

/// Aczel-Alsina parameter lambda in [1, +inf]. The infinite value is symbolic
/// and always dispatches to the minimum t-norm.
class TNormParam {
 public:
  /// Throws std::invalid_argument for lambda < 1 or NaN.
  explicit TNormParam(double lambda = 1.0);

  static TNormParam infinity() noexcept { return TNormParam(Infinite{}); }

  bool is_infinite() const noexcept { return infinite_; }
  /// +inf for the symbolic value.
  double value() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : lambda_;
  }

  friend bool operator==(TNormParam a, TNormParam b) noexcept {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.lambda_ == b.lambda_);
  }
  friend bool operator<(TNormParam a, TNormParam b) noexcept {
    if (a.infinite_) return false;
    return b.infinite_ || a.lambda_ < b.lambda_;
  }
  friend bool operator<=(TNormParam a, TNormParam b) noexcept { return !(b < a); }

 private:
  struct Infinite {};
  explicit TNormParam(Infinite) noexcept : lambda_(1.0), infinite_(true) {}

  double lambda_ = 1.0;
  bool infinite_ = false;
};

/// Dubois-Prade transform. Masses are ranked in descending order (stable, so
/// ties keep ascending label order); equal masses share one possibility degree.
/// Throws std::invalid_argument for negative masses or a sum off by > 1e-9.
PossibilityDistribution dpt(std::span<const double> p);

/// T_lambda(a, b) = exp(-(|log a|^lambda + |log b|^lambda)^(1/lambda)).
double tnorm_scalar(TNormParam lambda, double a, double b);

/// Elementwise K-ary combination. Throws on an empty list or mismatched lengths.
PossibilityDistribution tnorm_combine(TNormParam lambda,
                                      std::span<const PossibilityDistribution> dists);

/// Pairwise elementwise combination written into `out` (sized like `a`).
void tnorm_pair(TNormParam lambda, std::span<const double> a, std::span<const double> b,
                std::span<double> out);

/// (1 - alpha) * pi + alpha. Throws for alpha outside [0, 1].
PossibilityDistribution discount(std::span<const double> pi, double alpha);

/// Argmax with a uniform random choice among tied maxima.
Label decide(std::span<const double> pi, std::mt19937_64& rng);

/// Indices attaining the maximum (exact comparison).
std::vector<Label> argmax_set(std::span<const double> pi);

/// Pi(A) = max over A. Throws on an empty or out-of-range subset.
double possibility_measure(std::span<const double> pi, std::span<const Label> subset);

/// N(A) = 1 - Pi(complement of A); N(Omega) = 1.
double necessity_measure(std::span<const double> pi, std::span<const Label> subset);

bool is_normalized(std::span<const double> pi) noexcept;

}  // namespace spocc
