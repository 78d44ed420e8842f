#include "spocc/synthetic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spocc/softmax.hpp"

namespace spocc {

namespace {

// Blob centers in units of the half-side; blobs 0 and 2 carry label 0.
constexpr double kCenters[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<std::size_t> resolve_rows(const Dataset& data, std::span<const std::size_t> rows) {
  if (!rows.empty()) return {rows.begin(), rows.end()};
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return all;
}

Label majority(const Dataset& data, std::span<const std::size_t> rows, std::size_t labels) {
  std::vector<std::size_t> counts(labels, 0);
  for (std::size_t r : rows) ++counts[data.y[r]];
  return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double gini(std::span<const double> counts, double total) {
  if (total == 0.0) return 0.0;
  double s = 1.0;
  for (double c : counts) s -= (c / total) * (c / total);
  return s;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

// Best axis-aligned split of `rows` by weighted Gini impurity; feature -1 when
// no split lowers the impurity.
Split best_split(const Dataset& data, std::span<const std::size_t> rows, std::size_t labels) {
  const double n = static_cast<double>(rows.size());
  std::vector<double> total(labels, 0.0);
  for (std::size_t r : rows) total[data.y[r]] += 1.0;
  Split best;
  best.impurity = gini(total, n);
  const double parent = best.impurity;

  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::vector<double> left(labels), right(labels);
  for (std::size_t f = 0; f < data.dims; ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return data.x[a * data.dims + f] < data.x[b * data.dims + f];
    });
    std::fill(left.begin(), left.end(), 0.0);
    right = total;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const Label y = data.y[order[i]];
      left[y] += 1.0;
      right[y] -= 1.0;
      const double v = data.x[order[i] * data.dims + f];
      const double next = data.x[order[i + 1] * data.dims + f];
      if (!(next > v)) continue;
      const double nl = static_cast<double>(i + 1);
      const double imp = (nl * gini(left, nl) + (n - nl) * gini(right, n - nl)) / n;
      if (imp < best.impurity - 1e-12) {
        best = {static_cast<int>(f), 0.5 * (v + next), imp};
      }
    }
  }
  if (best.feature < 0 || !(best.impurity < parent - 1e-12)) best.feature = -1;
  return best;
}

int grow(BaseClassifier& tree, const Dataset& data, std::vector<std::size_t> rows, int depth) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back({});
  tree.nodes[id].label = majority(data, rows, tree.labels);
  if (depth == 0) return id;
  const Split s = best_split(data, rows, tree.labels);
  if (s.feature < 0) return id;
  std::vector<std::size_t> lo, hi;
  for (std::size_t r : rows)
    (data.x[r * data.dims + s.feature] <= s.threshold ? lo : hi).push_back(r);
  tree.nodes[id].feature = s.feature;
  tree.nodes[id].threshold = s.threshold;
  const int l = grow(tree, data, std::move(lo), depth - 1);
  const int r = grow(tree, data, std::move(hi), depth - 1);
  tree.nodes[id].left = l;
  tree.nodes[id].right = r;
  return id;
}

void check_rows(const Dataset& data, std::span<const std::size_t> rows, std::size_t labels) {
  if (rows.empty()) throw std::invalid_argument("base learner: empty training subset");
  for (std::size_t r : rows) {
    if (r >= data.size()) throw std::out_of_range("base learner: row index out of range");
    if (data.y[r] >= labels) throw std::out_of_range("base learner: label out of range");
  }
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.dims = dims;
  for (std::size_t r : rows) {
    auto p = point(r);
    out.x.insert(out.x.end(), p.begin(), p.end());
    out.y.push_back(y[r]);
  }
  return out;
}

Dataset generate(const GaussianQuadrantConfig& config, std::mt19937_64& rng) {
  if (!(config.sigma > 0.0)) throw std::invalid_argument("generate: sigma must be positive");
  if (config.beta && !(*config.beta >= 0.0 && *config.beta <= 1.0))
    throw std::invalid_argument("generate: beta must lie in [0, 1]");
  Dataset d;
  d.dims = 2;
  d.x.reserve(2 * config.n);
  d.y.reserve(config.n);
  std::normal_distribution<double> noise(0.0, config.sigma);
  std::uniform_int_distribution<int> blob(0, 3), pair(0, 1);
  for (std::size_t i = 0; i < config.n; ++i) {
    int component;
    if (config.beta) {
      const bool first = std::bernoulli_distribution(*config.beta)(rng);
      component = (first ? 0 : 1) + 2 * pair(rng);
    } else {
      component = blob(rng);
    }
    const double x1 = config.half_side * kCenters[component][0] + noise(rng);
    const double x2 = config.half_side * kCenters[component][1] + noise(rng);
    d.x.push_back(x1);
    d.x.push_back(x2);
    d.y.push_back(static_cast<Label>(component % 2));
  }
  return d;
}

Label optimal_label(const GaussianQuadrantConfig& config, std::span<const double> x) {
  const double beta = config.beta.value_or(0.5);
  const double c = config.half_side, s2 = 2.0 * config.sigma * config.sigma;
  double density[2] = {0.0, 0.0};
  for (int k = 0; k < 4; ++k) {
    const double d1 = x[0] - c * kCenters[k][0], d2 = x[1] - c * kCenters[k][1];
    density[k % 2] += std::exp(-(d1 * d1 + d2 * d2) / s2);
  }
  return beta * density[0] >= (1.0 - beta) * density[1] ? 0 : 1;
}

double quadrant_rule_accuracy(double half_side, double sigma) {
  const double p = normal_cdf(half_side / sigma);
  return p * p + (1.0 - p) * (1.0 - p);
}

double calibrate_half_side(double target) {
  if (!(target > 0.5 && target < 1.0))
    throw std::invalid_argument("calibrate_half_side: target must lie in (0.5, 1)");
  double lo = 0.0, hi = 1.0;
  while (quadrant_rule_accuracy(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (quadrant_rule_accuracy(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

int quadrant(std::span<const double> x) {
  if (x[0] >= 0.0) return x[1] >= 0.0 ? 1 : 4;
  return x[1] >= 0.0 ? 2 : 3;
}

std::vector<std::vector<std::size_t>> split_overlapping(const Dataset& data,
                                                        std::span<const std::size_t> rows) {
  if (data.dims != 2) throw std::invalid_argument("split_overlapping: 2-D data required");
  std::vector<std::vector<std::size_t>> out(4);
  for (std::size_t r : resolve_rows(data, rows)) {
    const int q = quadrant(data.point(r));
    for (int k = 1; k <= 4; ++k) {
      const int opposite = (k + 1) % 4 + 1;
      if (q != opposite) out[k - 1].push_back(r);
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> pca_split(const Dataset& data, std::size_t m) {
  if (m < 2) throw std::invalid_argument("pca_split: need at least two subsets");
  const std::size_t d = data.dims;
  Label max_label = 0;
  for (Label y : data.y) max_label = std::max(max_label, y);
  std::vector<std::vector<std::size_t>> out(m);
  for (Label cls = 0; cls <= max_label; ++cls) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.y[i] == cls) rows.push_back(i);
    if (rows.empty()) continue;
    if (rows.size() < m)
      throw std::invalid_argument("pca_split: class " + std::to_string(cls) + " has fewer than " +
                                  std::to_string(m) + " points");

    Eigen::MatrixXd X(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t f = 0; f < d; ++f) X(i, f) = data.x[rows[i] * d + f];
    const Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;
    const Eigen::MatrixXd cov = X.transpose() * X / static_cast<double>(rows.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::VectorXd axis = eig.eigenvectors().col(d - 1);
    Eigen::Index big;
    axis.cwiseAbs().maxCoeff(&big);
    if (axis(big) < 0) axis = -axis;
    const Eigen::VectorXd proj = X * axis;

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return proj(a) < proj(b); });
    const std::size_t block = rows.size() / m;
    for (std::size_t i = 0; i < order.size(); ++i)
      out[std::min(i / block, m - 1)].push_back(rows[order[i]]);
  }
  for (auto& s : out) std::sort(s.begin(), s.end());
  return out;
}

Label BaseClassifier::predict(std::span<const double> x) const {
  if (x.size() != dims) throw std::invalid_argument("base classifier: feature count mismatch");
  switch (kind) {
    case Kind::tree: {
      int id = 0;
      while (nodes[id].feature >= 0)
        id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
      return nodes[id].label;
    }
    case Kind::logistic: {
      std::vector<double> s(labels);
      softmax_scores(coefficients, x, labels, s);
      return static_cast<Label>(std::max_element(s.begin(), s.end()) - s.begin());
    }
    case Kind::knn: {
      std::vector<std::pair<double, std::size_t>> dist(memory.size());
      for (std::size_t i = 0; i < memory.size(); ++i) {
        double s = 0.0;
        for (std::size_t f = 0; f < dims; ++f) {
          const double t = memory.x[i * dims + f] - x[f];
          s += t * t;
        }
        dist[i] = {s, i};
      }
      const std::size_t k = std::min(neighbors, dist.size());
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      std::vector<std::size_t> votes(labels, 0);
      for (std::size_t i = 0; i < k; ++i) ++votes[memory.y[dist[i].second]];
      return static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
  }
  return 0;
}

BaseClassifier train_depth2_tree(const Dataset& data, std::span<const std::size_t> rows,
                                 std::size_t labels) {
  check_rows(data, rows, labels);
  BaseClassifier c;
  c.kind = BaseClassifier::Kind::tree;
  c.dims = data.dims;
  c.labels = labels;
  grow(c, data, {rows.begin(), rows.end()}, 2);
  return c;
}

BaseClassifier train_logistic(const Dataset& data, std::span<const std::size_t> rows,
                              std::size_t labels, double l2) {
  check_rows(data, rows, labels);
  BaseClassifier c;
  c.kind = BaseClassifier::Kind::logistic;
  c.dims = data.dims;
  c.labels = labels;
  const Label first = data.y[rows[0]];
  if (std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return data.y[r] == first; })) {
    c.coefficients.assign((data.dims + 1) * labels, 0.0);
    c.coefficients[data.dims * labels + first] = 1.0;
    return c;
  }
  SoftmaxProblem p;
  p.features = data.dims;
  p.classes = labels;
  p.l2 = l2;
  for (std::size_t r : rows) {
    auto x = data.point(r);
    p.x.insert(p.x.end(), x.begin(), x.end());
    p.y.push_back(data.y[r]);
  }
  c.coefficients = fit_softmax(p).coefficients;
  return c;
}

BaseClassifier train_knn(const Dataset& data, std::span<const std::size_t> rows,
                         std::size_t labels, std::size_t neighbors) {
  check_rows(data, rows, labels);
  if (neighbors == 0) throw std::invalid_argument("knn: neighbors must be positive");
  BaseClassifier c;
  c.kind = BaseClassifier::Kind::knn;
  c.dims = data.dims;
  c.labels = labels;
  c.memory = data.subset(rows);
  c.neighbors = neighbors;
  return c;
}

Label perturb_label(Label pred, PerturbationKind kind, double theta, std::size_t labels,
                    std::mt19937_64& rng) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("perturb: theta outside [0, 1]");
  if (kind == PerturbationKind::clone) return pred;
  if (!std::bernoulli_distribution(theta)(rng)) return pred;
  if (kind == PerturbationKind::fault)
    return static_cast<Label>(std::uniform_int_distribution<std::size_t>(0, labels - 1)(rng));
  auto other = static_cast<Label>(std::uniform_int_distribution<std::size_t>(0, labels - 2)(rng));
  return other >= pred ? other + 1 : other;
}

std::vector<Label> perturb(std::span<const Label> column, const PerturbationSpec& spec,
                           std::mt19937_64& rng, std::size_t labels) {
  std::vector<Label> out(column.size());
  for (std::size_t i = 0; i < column.size(); ++i)
    out[i] = perturb_label(column[i], spec.kind, spec.theta, labels, rng);
  return out;
}

}  // namespace spocc
