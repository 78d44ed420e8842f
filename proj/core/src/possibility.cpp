#include "spocc/possibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace spocc {

TNormParam::TNormParam(double lambda) : lambda_(lambda) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("t-norm parameter must be >= 1");
  if (std::isinf(lambda)) {
    lambda_ = 1.0;
    infinite_ = true;
  }
}

PossibilityDistribution dpt(std::span<const double> p) {
  if (p.empty()) throw std::invalid_argument("dpt: empty distribution");
  double total = 0.0;
  for (double mass : p) {
    if (!(mass >= 0.0)) throw std::invalid_argument("dpt: negative or NaN mass");
    total += mass;
  }
  if (std::abs(total - 1.0) > kProbabilitySumTolerance)
    throw std::invalid_argument("dpt: masses sum to " + std::to_string(total) + ", not 1");

  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });

  // tail[i] = sum of the i-th and all smaller ranked masses, accumulated from the
  // smallest upward.
  std::vector<double> tail(p.size());
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) {
    acc += p[order[i]];
    tail[i] = acc;
  }

  PossibilityDistribution pi(p.size());
  pi[order[0]] = 1.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    pi[order[i]] = p[order[i]] == p[order[i - 1]] ? pi[order[i - 1]] : std::min(tail[i], 1.0);
  }
  return pi;
}

namespace {

// -log(a) with the zero floor already handled by callers.
inline double neg_log(double a) { return -std::log(a); }

}  // namespace

double tnorm_scalar(TNormParam lambda, double a, double b) {
  if (a < kPossibilityFloor || b < kPossibilityFloor) return 0.0;
  if (a >= 1.0) return std::min(b, 1.0);
  if (b >= 1.0) return a;
  const double lo = std::min(a, b);
  if (lambda.is_infinite()) return lo;
  const double l = lambda.value();
  if (l == 1.0) return std::min(a * b, lo);

  const double x = neg_log(a);
  const double y = neg_log(b);
  // Factor out the larger log so that x^l cannot overflow for big lambda.
  const double m = std::max(x, y);
  const double s = m * std::pow(std::pow(x / m, l) + std::pow(y / m, l), 1.0 / l);
  return std::min(std::exp(-s), lo);
}

void tnorm_pair(TNormParam lambda, std::span<const double> a, std::span<const double> b,
                std::span<double> out) {
  if (a.size() != b.size() || out.size() != a.size())
    throw std::invalid_argument("tnorm_pair: length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = tnorm_scalar(lambda, a[i], b[i]);
}

PossibilityDistribution tnorm_combine(TNormParam lambda,
                                      std::span<const PossibilityDistribution> dists) {
  if (dists.empty()) throw std::invalid_argument("tnorm_combine: no distributions");
  const std::size_t width = dists.front().size();
  for (const auto& d : dists)
    if (d.size() != width) throw std::invalid_argument("tnorm_combine: length mismatch");
  if (dists.size() == 1) return dists.front();

  PossibilityDistribution out(width);
  std::vector<double> logs(dists.size());
  for (std::size_t i = 0; i < width; ++i) {
    double lo = 1.0;
    bool zero = false;
    for (const auto& d : dists) {
      lo = std::min(lo, d[i]);
      if (d[i] < kPossibilityFloor) zero = true;
    }
    if (zero) {
      out[i] = 0.0;
      continue;
    }
    if (lambda.is_infinite()) {
      out[i] = lo;
      continue;
    }
    const double l = lambda.value();
    if (l == 1.0) {
      double prod = 1.0;
      for (const auto& d : dists) prod *= d[i];
      out[i] = std::min(prod, lo);
      continue;
    }
    // Direct K-ary form: exp(-(sum_k |log a_k|^l)^(1/l)), equal to any fold order.
    double m = 0.0;
    for (std::size_t k = 0; k < dists.size(); ++k) {
      logs[k] = dists[k][i] >= 1.0 ? 0.0 : neg_log(dists[k][i]);
      m = std::max(m, logs[k]);
    }
    if (m == 0.0) {
      out[i] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (double x : logs) sum += x == 0.0 ? 0.0 : std::pow(x / m, l);
    out[i] = std::min(std::exp(-m * std::pow(sum, 1.0 / l)), lo);
  }
  return out;
}

PossibilityDistribution discount(std::span<const double> pi, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("discount: alpha outside [0,1]");
  PossibilityDistribution out(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out[i] = (1.0 - alpha) * pi[i] + alpha;
  return out;
}

std::vector<Label> argmax_set(std::span<const double> pi) {
  std::vector<Label> best;
  if (pi.empty()) return best;
  const double top = *std::max_element(pi.begin(), pi.end());
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (pi[i] == top) best.push_back(static_cast<Label>(i));
  return best;
}

Label decide(std::span<const double> pi, std::mt19937_64& rng) {
  if (pi.empty()) throw std::invalid_argument("decide: empty distribution");
  const auto best = argmax_set(pi);
  if (best.size() == 1) return best.front();
  std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
  return best[pick(rng)];
}

double possibility_measure(std::span<const double> pi, std::span<const Label> subset) {
  if (subset.empty()) throw std::invalid_argument("possibility_measure: empty subset");
  double best = 0.0;
  for (Label i : subset) {
    if (i >= pi.size()) throw std::out_of_range("possibility_measure: label out of range");
    best = std::max(best, pi[i]);
  }
  return best;
}

double necessity_measure(std::span<const double> pi, std::span<const Label> subset) {
  std::vector<bool> in(pi.size(), false);
  for (Label i : subset) {
    if (i >= pi.size()) throw std::out_of_range("necessity_measure: label out of range");
    in[i] = true;
  }
  std::vector<Label> complement;
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (!in[i]) complement.push_back(static_cast<Label>(i));
  if (complement.empty()) return 1.0;
  return 1.0 - possibility_measure(pi, complement);
}

bool is_normalized(std::span<const double> pi) noexcept {
  if (pi.empty()) return false;
  return *std::max_element(pi.begin(), pi.end()) >= 1.0 - kNormalizationTolerance;
}

}  // namespace spocc
