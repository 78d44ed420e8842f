#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace spocc {

/// Ordered candidate values for a one-dimensional hyperparameter search.
/// The last point may be +inf (a symbolic limit value).
class GridSpec {
 public:
  enum class Scale { linear, logarithmic };

  /// Throws std::invalid_argument unless there are >= 2 strictly increasing points.
  GridSpec(std::vector<double> points, Scale scale);

  /// `count` points evenly spaced in log10 between lo and hi (inclusive),
  /// optionally followed by +inf.
  static GridSpec logarithmic(double lo, double hi, std::size_t count, bool with_infinity = false);
  static GridSpec linear(double lo, double hi, std::size_t count);

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  Scale scale() const noexcept { return scale_; }

 private:
  std::vector<double> points_;
  Scale scale_;
};

/// 100 log points on [1e-2, 1e2] plus +inf.
GridSpec default_rho_grid();
/// 100 log points on [1, 50] plus +inf.
GridSpec default_lambda_grid();
/// 100 log points on [1e-3, 1e3].
GridSpec default_temperature_grid();
/// 100 log points on [1e-4, 1e2].
GridSpec default_l2_grid();

/// Held-out row indices per fold, from a seeded shuffle. With folds == 1 the
/// single "fold" holds every row and callers train and evaluate on all rows.
/// Throws std::invalid_argument when folds == 0 or rows < folds.
std::vector<std::vector<std::size_t>> make_folds(std::size_t rows, std::size_t folds,
                                                 std::uint64_t seed);

/// Complement of `held_out` in [0, rows); all rows when folds == 1.
std::vector<std::size_t> training_rows(std::size_t rows, const std::vector<std::size_t>& held_out,
                                       std::size_t folds);

}  // namespace spocc
