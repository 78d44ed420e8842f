#include "spocc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spocc {

GridSpec::GridSpec(std::vector<double> points, Scale scale)
    : points_(std::move(points)), scale_(scale) {
  if (points_.size() < 2) throw std::invalid_argument("grid needs at least two points");
  for (std::size_t i = 1; i < points_.size(); ++i)
    if (!(points_[i] > points_[i - 1]))
      throw std::invalid_argument("grid points must be strictly increasing");
  if (std::isnan(points_.front())) throw std::invalid_argument("grid point is NaN");
}

GridSpec GridSpec::logarithmic(double lo, double hi, std::size_t count, bool with_infinity) {
  if (!(lo > 0.0 && hi > lo) || count < 2)
    throw std::invalid_argument("logarithmic grid needs 0 < lo < hi and >= 2 points");
  std::vector<double> points(count);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i)
    points[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  points.front() = lo;
  points.back() = hi;
  if (with_infinity) points.push_back(std::numeric_limits<double>::infinity());
  return GridSpec(std::move(points), Scale::logarithmic);
}

GridSpec GridSpec::linear(double lo, double hi, std::size_t count) {
  if (!(hi > lo) || count < 2) throw std::invalid_argument("linear grid needs lo < hi");
  std::vector<double> points(count);
  for (std::size_t i = 0; i < count; ++i)
    points[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return GridSpec(std::move(points), Scale::linear);
}

GridSpec default_rho_grid() { return GridSpec::logarithmic(1e-2, 1e2, 100, true); }
GridSpec default_lambda_grid() { return GridSpec::logarithmic(1.0, 50.0, 100, true); }
GridSpec default_temperature_grid() { return GridSpec::logarithmic(1e-3, 1e3, 100); }
GridSpec default_l2_grid() { return GridSpec::logarithmic(1e-4, 1e2, 100); }

std::vector<std::vector<std::size_t>> make_folds(std::size_t rows, std::size_t folds,
                                                 std::uint64_t seed) {
  if (folds == 0) throw std::invalid_argument("need at least one fold");
  if (rows < folds) throw std::invalid_argument("fewer rows than folds");
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  if (folds == 1) return {order};
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t i = 0; i < rows; ++i) out[i % folds].push_back(order[i]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

std::vector<std::size_t> training_rows(std::size_t rows, const std::vector<std::size_t>& held_out,
                                       std::size_t folds) {
  std::vector<std::size_t> out;
  if (folds == 1) {
    out.resize(rows);
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  std::vector<bool> skip(rows, false);
  for (std::size_t r : held_out) skip[r] = true;
  for (std::size_t r = 0; r < rows; ++r)
    if (!skip[r]) out.push_back(r);
  return out;
}

}  // namespace spocc
