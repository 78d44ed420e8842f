#pragma once

// Independent reference computations and random fixtures shared by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "spocc/estimation.hpp"
#include "spocc/possibility.hpp"

namespace oracle {

using spocc::Label;

// Aczel-Alsina t-norm straight from its definition, in long double.
inline double tnorm(double lambda, double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  if (std::isinf(lambda)) return std::min(a, b);
  const long double x = -std::log(static_cast<long double>(a));
  const long double y = -std::log(static_cast<long double>(b));
  const long double l = lambda;
  return static_cast<double>(std::exp(-std::pow(std::pow(x, l) + std::pow(y, l), 1.0L / l)));
}

inline std::vector<double> tnorm_fold(double lambda, const std::vector<std::vector<double>>& dists) {
  std::vector<double> out = dists.front();
  for (std::size_t k = 1; k < dists.size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = tnorm(lambda, out[i], dists[k][i]);
  return out;
}

// Closed form of the Dubois-Prade transform: pi_i = sum of masses not above p_i.
inline std::vector<double> dpt(const std::vector<double>& p) {
  std::vector<double> pi(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (double q : p)
      if (q <= p[i]) pi[i] += q;
  return pi;
}

inline std::vector<std::size_t> argmax_set(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] == top) out.push_back(i);
  return out;
}

// Random probability vector; `ties` draws masses from a coarse lattice so equal
// masses are common.
inline std::vector<double> random_probability(std::size_t l, std::mt19937_64& rng,
                                              bool ties = false) {
  std::vector<double> p(l);
  if (ties) {
    std::uniform_int_distribution<int> units(0, 4);
    int total = 0;
    for (auto& v : p) total += static_cast<int>(v = units(rng));
    if (total == 0) {
      p.assign(l, 1.0 / static_cast<double>(l));
      return p;
    }
    for (auto& v : p) v /= total;
    return p;
  }
  std::exponential_distribution<double> e(1.0);
  double total = 0.0;
  for (auto& v : p) total += (v = e(rng));
  for (auto& v : p) v /= total;
  return p;
}

// Table whose truth is uniform and where classifier k is correct with
// probability accuracy[k], otherwise a uniform wrong label.
inline spocc::ValidationTable noisy_table(std::size_t rows, std::span<const double> accuracy,
                                          std::size_t labels, std::mt19937_64& rng) {
  const std::size_t k = accuracy.size();
  std::vector<Label> preds(rows * k), truth(rows);
  std::uniform_int_distribution<Label> any(0, static_cast<Label>(labels - 1));
  std::uniform_int_distribution<Label> other(1, static_cast<Label>(labels - 1));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < rows; ++i) {
    truth[i] = any(rng);
    for (std::size_t c = 0; c < k; ++c)
      preds[i * k + c] =
          u(rng) < accuracy[c] ? truth[i] : static_cast<Label>((truth[i] + other(rng)) % labels);
  }
  return {spocc::LabelSpace::numbered(labels), k, std::move(preds), std::move(truth)};
}

// Table with `clustered` classifiers that copy one shared noisy prediction
// (each replaced by a uniform label with probability `jitter`) followed by
// `independent` classifiers that are conditionally independent given the truth.
inline spocc::ValidationTable clustered_table(std::size_t rows, std::size_t clustered,
                                              double shared_accuracy, double jitter,
                                              std::span<const double> independent,
                                              std::size_t labels, std::mt19937_64& rng) {
  const std::size_t k = clustered + independent.size();
  std::vector<Label> preds(rows * k), truth(rows);
  std::uniform_int_distribution<Label> any(0, static_cast<Label>(labels - 1));
  std::uniform_int_distribution<Label> other(1, static_cast<Label>(labels - 1));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto noisy = [&](Label y, double acc) {
    return u(rng) < acc ? y : static_cast<Label>((y + other(rng)) % labels);
  };
  for (std::size_t i = 0; i < rows; ++i) {
    const Label y = truth[i] = any(rng);
    const Label shared = noisy(y, shared_accuracy);
    for (std::size_t c = 0; c < clustered; ++c)
      preds[i * k + c] = u(rng) < jitter ? any(rng) : shared;
    for (std::size_t c = 0; c < independent.size(); ++c)
      preds[i * k + clustered + c] = noisy(y, independent[c]);
  }
  return {spocc::LabelSpace::numbered(labels), k, std::move(preds), std::move(truth)};
}

// Fully random table: every prediction and truth uniform.
inline spocc::ValidationTable random_table(std::size_t rows, std::size_t classifiers,
                                           std::size_t labels, std::mt19937_64& rng) {
  std::vector<Label> preds(rows * classifiers), truth(rows);
  std::uniform_int_distribution<Label> any(0, static_cast<Label>(labels - 1));
  for (auto& v : preds) v = any(rng);
  for (auto& v : truth) v = any(rng);
  return {spocc::LabelSpace::numbered(labels), classifiers, std::move(preds), std::move(truth)};
}

// Every prediction vector of length k over l labels, in lexicographic order.
inline std::vector<std::vector<Label>> all_vectors(std::size_t k, std::size_t l) {
  std::vector<std::vector<Label>> out;
  std::vector<Label> v(k, 0);
  while (true) {
    out.push_back(v);
    std::size_t i = k;
    for (; i > 0; --i) {
      if (++v[i - 1] < l) break;
      v[i - 1] = 0;
    }
    if (i == 0) break;
  }
  return out;
}

}  // namespace oracle
