#include "spocc/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spocc/error.hpp"

namespace spocc {

namespace {

void check_shape(const SoftmaxProblem& p, std::span<const double> w) {
  if (p.classes < 2) throw std::invalid_argument("softmax: need at least two classes");
  if (p.x.size() != p.rows() * p.features) throw std::invalid_argument("softmax: design shape");
  if (!p.weight.empty() && p.weight.size() != p.rows())
    throw std::invalid_argument("softmax: one weight per row required");
  if (w.size() != p.coefficient_count()) throw std::invalid_argument("softmax: coefficient count");
  if (p.rows() == 0) throw std::invalid_argument("softmax: no rows");
}

double total_weight(const SoftmaxProblem& p) {
  if (p.weight.empty()) return static_cast<double>(p.rows());
  double t = 0.0;
  for (double w : p.weight) t += w;
  return t;
}

double evaluate(const SoftmaxProblem& p, std::span<const double> w, double* grad) {
  check_shape(p, w);
  const std::size_t d = p.features, l = p.classes;
  const double scale = 1.0 / total_weight(p);
  if (grad) std::fill(grad, grad + w.size(), 0.0);

  std::vector<double> s(l);
  double loss = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const double wi = p.weight.empty() ? 1.0 : p.weight[i];
    if (wi == 0.0) continue;
    std::span<const double> xi(p.x.data() + i * d, d);
    softmax_scores(w, xi, l, s);
    const double top = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) z += std::exp(v - top);
    const double lse = top + std::log(z);
    loss += wi * (lse - s[p.y[i]]);
    if (!grad) continue;
    for (std::size_t c = 0; c < l; ++c) {
      const double r = wi * scale * (std::exp(s[c] - lse) - (c == p.y[i] ? 1.0 : 0.0));
      for (std::size_t f = 0; f < d; ++f) grad[f * l + c] += r * xi[f];
      grad[d * l + c] += r;
    }
  }
  double penalty = 0.0;
  for (std::size_t k = 0; k < d * l; ++k) {
    penalty += w[k] * w[k];
    if (grad) grad[k] += 2.0 * p.l2 * w[k];
  }
  return loss * scale + p.l2 * penalty;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void softmax_scores(std::span<const double> w, std::span<const double> x, std::size_t classes,
                    std::span<double> out) {
  const std::size_t d = x.size();
  for (std::size_t c = 0; c < classes; ++c) out[c] = w[d * classes + c];
  for (std::size_t f = 0; f < d; ++f) {
    if (x[f] == 0.0) continue;
    const double* row = w.data() + f * classes;
    for (std::size_t c = 0; c < classes; ++c) out[c] += row[c] * x[f];
  }
}

double softmax_objective(const SoftmaxProblem& problem, std::span<const double> coefficients) {
  return evaluate(problem, coefficients, nullptr);
}

double softmax_objective_gradient(const SoftmaxProblem& problem,
                                  std::span<const double> coefficients,
                                  std::span<double> gradient) {
  if (gradient.size() != coefficients.size())
    throw std::invalid_argument("softmax: gradient size");
  return evaluate(problem, coefficients, gradient.data());
}

SoftmaxFit fit_softmax(const SoftmaxProblem& problem, std::span<const double> start,
                       const SoftmaxFitOptions& options) {
  SoftmaxFit fit;
  fit.coefficients.assign(problem.coefficient_count(), 0.0);
  if (!start.empty()) {
    if (start.size() != fit.coefficients.size())
      throw std::invalid_argument("softmax: warm start has the wrong size");
    std::copy(start.begin(), start.end(), fit.coefficients.begin());
  }

  // Curvature bound of the cross-entropy term: 0.5 * max ||(x, 1)||^2.
  double max_sq = 0.0;
  for (std::size_t i = 0; i < problem.rows(); ++i) {
    double sq = 1.0;
    for (std::size_t f = 0; f < problem.features; ++f) {
      const double v = problem.x[i * problem.features + f];
      sq += v * v;
    }
    max_sq = std::max(max_sq, sq);
  }
  double step = 1.0 / (0.5 * max_sq + 2.0 * problem.l2);

  std::vector<double> grad(fit.coefficients.size()), trial(fit.coefficients.size()),
      trial_grad(fit.coefficients.size());
  double f = softmax_objective_gradient(problem, fit.coefficients, grad);
  double gnorm = norm(grad);
  std::size_t it = 0;
  while (gnorm > options.tolerance && it < options.max_iterations) {
    bool accepted = false;
    double ft = f;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t k = 0; k < trial.size(); ++k)
        trial[k] = fit.coefficients[k] - step * grad[k];
      ft = softmax_objective_gradient(problem, trial, trial_grad);
      if (ft <= f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++it;
    if (!accepted) break;
    // Barzilai-Borwein length for the next step: s.s / s.y.
    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < trial.size(); ++k) {
      const double sk = trial[k] - fit.coefficients[k], yk = trial_grad[k] - grad[k];
      ss += sk * sk;
      sy += sk * yk;
    }
    step = sy > 0.0 ? ss / sy : 2.0 * step;
    fit.coefficients.swap(trial);
    grad.swap(trial_grad);
    f = ft;
    gnorm = norm(grad);
  }
  if (!std::isfinite(f)) throw NumericError("softmax: objective is not finite");
  fit.objective = f;
  fit.gradient_norm = gnorm;
  fit.iterations = it;
  fit.converged = gnorm <= options.tolerance;
  return fit;
}

}  // namespace spocc
