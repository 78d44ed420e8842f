#include "spocc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "cells.hpp"

namespace spocc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<TNormParam> grid_params(const GridSpec& grid) {
  std::vector<TNormParam> out;
  out.reserve(grid.size());
  for (double p : grid.points()) out.emplace_back(p);
  return out;
}

std::vector<PossibilityDistribution> leaf_inputs(const SpoccModel& model,
                                                 std::span<const Label> preds) {
  if (preds.size() != model.classifiers())
    throw std::invalid_argument("prediction vector length does not match the ensemble size");
  std::vector<PossibilityDistribution> leaves;
  leaves.reserve(preds.size());
  for (std::size_t k = 0; k < preds.size(); ++k) {
    if (preds[k] >= model.label_count()) throw std::out_of_range("predicted label out of range");
    leaves.push_back(model.tables[k][preds[k]]);
  }
  return leaves;
}

// Smallest internal-child lambda of `a`: the upper bound the ancestor <=
// descendant constraint puts on lambda_a.
TNormParam child_bound(const Dendrogram& g, const detail::GraphEvaluator& ev, std::size_t a) {
  TNormParam bound = TNormParam::infinity();
  for (NodeRef child : {g.internal(a).left, g.internal(a).right})
    if (!child.is_leaf && ev.get(child.index) < bound) bound = ev.get(child.index);
  return bound;
}

void search_one(const Dendrogram& g, detail::GraphEvaluator& ev,
                const std::vector<TNormParam>& grid, std::size_t a) {
  const TNormParam bound = child_bound(g, ev, a);
  TNormParam best = grid.front();
  double best_acc = -1.0;
  for (TNormParam p : grid) {
    if (bound < p) break;
    ev.set(a, p);
    const double acc = ev.accuracy();
    if (acc > best_acc) {
      best_acc = acc;
      best = p;
    }
  }
  ev.set(a, best);
}

// Exhaustive search over a cluster root `parent` and its single internal child.
void search_pair(detail::GraphEvaluator& ev, const std::vector<TNormParam>& grid,
                 std::size_t child, std::size_t parent) {
  TNormParam best_child = grid.front(), best_parent = grid.front();
  double best_acc = -1.0;
  for (TNormParam pc : grid) {
    ev.set(child, pc);
    for (TNormParam pp : grid) {
      if (pc < pp) break;
      ev.set(parent, pp);
      const double acc = ev.accuracy();
      if (acc > best_acc) {
        best_acc = acc;
        best_child = pc;
        best_parent = pp;
      }
    }
  }
  ev.set(child, best_child);
  ev.set(parent, best_parent);
}

LambdaSearchResult search_distinct(const ValidationTable& table, const Dendrogram& g,
                                   const GridSpec& grid_spec) {
  LambdaSearchResult result;
  const std::size_t K = g.leaf_count();
  if (K == 1) return result;

  const auto grid = grid_params(grid_spec);
  const auto tables = possibility_tables(table);
  const auto cells = detail::group_cells(table);
  detail::GraphEvaluator ev(g, LambdaArray(g.internal_count(), TNormParam(1.0)), tables, cells);

  LambdaArray previous = ev.lambdas();
  for (std::size_t count = 2; count <= K; ++count) {
    const auto clustering = clusters_at(g, count);
    std::vector<bool> treated(g.internal_count(), false);
    for (NodeRef root : clustering.roots) {
      if (root.is_leaf) continue;
      const auto nodes = g.internals_under(root);
      if (nodes.size() == 1) {
        search_one(g, ev, grid, nodes[0]);
      } else if (nodes.size() == 2) {
        search_pair(ev, grid, nodes[0], nodes[1]);
      } else {
        for (std::size_t a : nodes) search_one(g, ev, grid, a);
      }
      for (std::size_t a : nodes) treated[a] = true;
    }
    for (std::size_t a : g.postorder())
      if (!treated[a]) search_one(g, ev, grid, a);

    const double error = 1.0 - ev.accuracy();
    if (count >= 3 && error >= result.errors.back()) {
      for (std::size_t a = 0; a < previous.size(); ++a) ev.set(a, previous[a]);
      break;
    }
    result.errors.push_back(error);
    result.cluster_count = count;
    previous = ev.lambdas();
  }
  result.lambdas = ev.lambdas();
  return result;
}

}  // namespace

PossibilityDistribution SpoccModel::aggregate(std::span<const Label> preds) const {
  const auto leaves = leaf_inputs(*this, preds);
  if (mode == SpoccMode::adaptive) {
    if (!dendrogram) throw std::invalid_argument("adaptive model without a dendrogram");
    return execute(*dendrogram, lambdas, leaves);
  }
  return tnorm_combine(flat_lambda, leaves);
}

Label SpoccModel::predict(std::span<const Label> preds, std::mt19937_64& rng) const {
  return decide(aggregate(preds), rng);
}

PossibilityTables possibility_tables(const ValidationTable& table) {
  PossibilityTables out(table.classifiers());
  for (std::size_t k = 0; k < table.classifiers(); ++k) {
    const auto m = confusion_matrix(table, k);
    out[k].reserve(table.label_count());
    for (std::size_t j = 0; j < table.label_count(); ++j)
      out[k].push_back(dpt(conditional_posterior(m, static_cast<Label>(j))));
  }
  return out;
}

std::vector<double> error_rates(const ValidationTable& table) {
  std::vector<double> out(table.classifiers());
  for (std::size_t k = 0; k < table.classifiers(); ++k)
    out[k] = error_rate(confusion_matrix(table, k));
  return out;
}

std::vector<double> rectified_error_rates(const ValidationTable& table) {
  std::vector<double> out(table.classifiers());
  for (std::size_t k = 0; k < table.classifiers(); ++k)
    out[k] = rectified_error_rate(confusion_matrix(table, k));
  return out;
}

PossibilityTables discount_tables(const PossibilityTables& base, std::span<const double> alphas) {
  if (alphas.size() != base.size()) throw std::invalid_argument("one alpha per classifier required");
  PossibilityTables out(base.size());
  for (std::size_t k = 0; k < base.size(); ++k)
    for (const auto& pi : base[k]) out[k].push_back(alphas[k] == 0.0 ? pi : discount(pi, alphas[k]));
  return out;
}

SpoccModel train_spocc(const ValidationTable& table, TNormParam flat_lambda) {
  if (table.rows() == 0) throw std::invalid_argument("train_spocc: empty validation table");
  SpoccModel model;
  model.labels = table.labels();
  model.mode = SpoccMode::flat;
  model.base_tables = possibility_tables(table);
  model.tables = model.base_tables;
  model.error_rates = error_rates(table);
  model.rectified_error_rates = rectified_error_rates(table);
  model.alphas.assign(table.classifiers(), 0.0);
  model.flat_lambda = flat_lambda;
  return model;
}

Label predict_spocc(const SpoccModel& model, std::span<const Label> preds, std::mt19937_64& rng) {
  if (model.mode != SpoccMode::flat) throw std::invalid_argument("predict_spocc: model is adaptive");
  return model.predict(preds, rng);
}

std::vector<double> compute_alphas(std::span<const double> error_rates, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("compute_alphas: rho must be >= 0");
  std::vector<double> alphas(error_rates.size(), 0.0);
  if (error_rates.empty()) return alphas;
  for (double r : error_rates)
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("compute_alphas: error rate outside [0,1]");

  const auto best_it = std::min_element(error_rates.begin(), error_rates.end());
  const double best = *best_it;
  if (best >= 1.0) {
    std::fill(alphas.begin(), alphas.end(), 1.0);
    alphas[static_cast<std::size_t>(best_it - error_rates.begin())] = 0.0;
    return alphas;
  }
  for (std::size_t k = 0; k < error_rates.size(); ++k) {
    if (error_rates[k] == best) continue;
    if (std::isinf(rho)) {
      alphas[k] = 1.0;
      continue;
    }
    const double ratio = (1.0 - error_rates[k]) / (1.0 - best);
    alphas[k] = std::clamp(1.0 - std::pow(ratio, rho), 0.0, 1.0);
  }
  return alphas;
}

namespace {

double structure_accuracy(const SpoccModel& structure, const PossibilityTables& tables,
                          const detail::CellTable& cells) {
  if (structure.mode == SpoccMode::adaptive) {
    detail::GraphEvaluator ev(*structure.dendrogram, structure.lambdas, tables, cells);
    return ev.accuracy();
  }
  if (cells.total == 0.0) return 0.0;
  double correct = 0.0;
  std::vector<PossibilityDistribution> leaves(cells.classifiers);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto preds = cells.cell(c);
    for (std::size_t k = 0; k < preds.size(); ++k) leaves[k] = tables[k][preds[k]];
    correct += detail::expected_correct(tnorm_combine(structure.flat_lambda, leaves),
                                        cells.counts(c));
  }
  return correct / cells.total;
}

}  // namespace

double expected_accuracy(const SpoccModel& model, const ValidationTable& table) {
  if (table.classifiers() != model.classifiers())
    throw std::invalid_argument("expected_accuracy: column count does not match the model");
  const auto cells = detail::group_cells(table);
  return structure_accuracy(model, model.tables, cells);
}

double tune_rho(const ValidationTable& table, const SpoccModel& structure, const GridSpec& grid,
                std::size_t folds, std::uint64_t seed) {
  if (table.classifiers() != structure.classifiers())
    throw std::invalid_argument("tune_rho: column count does not match the structure");
  const auto held_out = make_folds(table.rows(), folds, seed);
  std::vector<double> mean_acc(grid.size(), 0.0);
  for (const auto& fold : held_out) {
    const auto train = table.select_rows(training_rows(table.rows(), fold, folds));
    const auto base = possibility_tables(train);
    const auto errors = rectified_error_rates(train);
    const auto cells = detail::group_cells(table, fold);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto tables = discount_tables(base, compute_alphas(errors, grid[g]));
      mean_acc[g] += structure_accuracy(structure, tables, cells) / static_cast<double>(folds);
    }
  }
  const auto best = std::max_element(mean_acc.begin(), mean_acc.end());
  return grid[static_cast<std::size_t>(best - mean_acc.begin())];
}

LambdaSearchResult heuristic_lambda_search(const ValidationTable& table, const Dendrogram& g,
                                           const GridSpec& grid) {
  if (table.classifiers() != g.leaf_count())
    throw std::invalid_argument("heuristic_lambda_search: one leaf per classifier required");
  const std::size_t n = g.internal_count();

  // A subtree is pinned when all of its leaves carry the same validation column;
  // it then stands for a single classifier.
  std::vector<bool> pinned(n, false);
  std::vector<std::size_t> rep(n, 0);
  auto rep_of = [&](NodeRef r) { return r.is_leaf ? r.index : rep[r.index]; };
  auto collapsible = [&](NodeRef r) { return r.is_leaf || pinned[r.index]; };
  for (std::size_t a : g.postorder()) {
    const auto& node = g.internal(a);
    rep[a] = std::min(rep_of(node.left), rep_of(node.right));
    pinned[a] = collapsible(node.left) && collapsible(node.right) &&
                table.columns_equal(rep_of(node.left), rep_of(node.right));
  }

  LambdaSearchResult result;
  result.lambdas.assign(n, TNormParam::infinity());
  std::vector<std::size_t> free_nodes;
  for (std::size_t a = 0; a < n; ++a)
    if (!pinned[a]) free_nodes.push_back(a);
  if (free_nodes.empty()) return result;

  // Reduced tree over the distinct columns.
  std::vector<std::size_t> reps;
  auto note_leaf = [&](NodeRef r) {
    if (collapsible(r)) reps.push_back(rep_of(r));
  };
  for (std::size_t a : free_nodes) {
    note_leaf(g.internal(a).left);
    note_leaf(g.internal(a).right);
  }
  std::sort(reps.begin(), reps.end());
  std::map<std::size_t, std::size_t> leaf_pos, node_pos;
  for (std::size_t i = 0; i < reps.size(); ++i) leaf_pos[reps[i]] = i;
  for (std::size_t i = 0; i < free_nodes.size(); ++i) node_pos[free_nodes[i]] = i;
  auto reduce = [&](NodeRef r) {
    return collapsible(r) ? NodeRef::leaf(leaf_pos.at(rep_of(r)))
                          : NodeRef::internal(node_pos.at(r.index));
  };
  std::vector<InternalNode> reduced;
  for (std::size_t a : free_nodes) {
    const auto& node = g.internal(a);
    reduced.push_back({reduce(node.left), reduce(node.right), node.height});
  }
  const Dendrogram reduced_tree(reps.size(), std::move(reduced));
  const auto reduced_result = search_distinct(table.select_columns(reps), reduced_tree, grid);

  for (std::size_t i = 0; i < free_nodes.size(); ++i)
    result.lambdas[free_nodes[i]] = reduced_result.lambdas[i];
  result.cluster_count = reduced_result.cluster_count;
  result.errors = reduced_result.errors;
  return result;
}

DependenceTree build_dependence_tree(const ValidationTable& table) {
  const std::size_t K = table.classifiers();
  if (K == 1) return {Dendrogram(1, {}), {}};

  std::vector<std::size_t> reps;
  std::vector<std::vector<std::size_t>> copies;
  for (std::size_t k = 0; k < K; ++k) {
    auto it = std::find_if(reps.begin(), reps.end(),
                           [&](std::size_t r) { return table.columns_equal(r, k); });
    if (it == reps.end()) {
      reps.push_back(k);
      copies.emplace_back();
    } else {
      copies[static_cast<std::size_t>(it - reps.begin())].push_back(k);
    }
  }

  std::vector<InternalNode> internals;
  std::vector<NodeRef> rep_node(reps.size());
  std::optional<Dendrogram> distinct;
  if (reps.size() >= 2) {
    distinct = hac(build_dissimilarity(table.select_columns(reps)));
    internals = distinct->internals();
  }
  std::vector<bool> pinned(internals.size(), false);

  // Chains of pinned nodes joining each representative with its copies.
  for (std::size_t i = 0; i < reps.size(); ++i) {
    NodeRef top = NodeRef::leaf(reps[i]);
    if (!copies[i].empty()) {
      const auto column = table.column(reps[i]);
      double h = 1.0 - self_kappa(column, table.label_count());
      if (distinct) h = std::min(h, distinct->internal(*distinct->parent(NodeRef::leaf(i))).height);
      for (std::size_t copy : copies[i]) {
        internals.push_back({top, NodeRef::leaf(copy), h});
        pinned.push_back(true);
        top = NodeRef::internal(internals.size() - 1);
      }
    }
    rep_node[i] = top;
  }
  if (distinct) {
    for (std::size_t a = 0; a < distinct->internal_count(); ++a)
      for (NodeRef* child : {&internals[a].left, &internals[a].right})
        if (child->is_leaf) *child = rep_node[child->index];
  }
  return {Dendrogram(K, std::move(internals)), std::move(pinned)};
}

SpoccModel train_adaspocc(const ValidationTable& table, const AdaSpoccOptions& options) {
  SpoccModel model = train_spocc(table);
  model.mode = SpoccMode::adaptive;
  auto dependence = build_dependence_tree(table);
  model.dendrogram = std::move(dependence.tree);
  if (table.classifiers() == 1) return model;

  auto search = heuristic_lambda_search(table, *model.dendrogram, options.lambda_grid);
  model.lambdas = std::move(search.lambdas);
  model.cluster_count = search.cluster_count;

  model.rho = tune_rho(table, model, options.rho_grid, options.folds, options.seed);
  model.alphas = compute_alphas(model.rectified_error_rates, model.rho);
  model.tables = discount_tables(model.base_tables, model.alphas);
  return model;
}

Label predict_adaspocc(const SpoccModel& model, std::span<const Label> preds,
                       std::mt19937_64& rng) {
  if (model.mode != SpoccMode::adaptive)
    throw std::invalid_argument("predict_adaspocc: model is not adaptive");
  return model.predict(preds, rng);
}

double normalized_dissimilarity(std::span<const Label> a, std::span<const Label> b,
                                std::size_t labels) {
  if (std::equal(a.begin(), a.end(), b.begin(), b.end())) return 0.0;
  const double scale = std::max(self_kappa(a, labels), self_kappa(b, labels));
  if (scale <= 0.0) return 1.0;
  return std::clamp(1.0 - dependence_kappa(a, b, labels) / scale, 0.0, 1.0);
}

SpoccModel append_classifier(const SpoccModel& model, const ValidationTable& table,
                             const AppendOptions& options, AppendReport* report) {
  const std::size_t K = model.classifiers();
  if (table.classifiers() != K + 1)
    throw std::invalid_argument("append_classifier: table must hold the model's columns plus one");
  if (!(table.labels() == model.labels))
    throw std::invalid_argument("append_classifier: label space differs from the model's");

  const auto m = confusion_matrix(table, K);
  std::vector<PossibilityDistribution> new_table;
  for (std::size_t j = 0; j < table.label_count(); ++j)
    new_table.push_back(dpt(conditional_posterior(m, static_cast<Label>(j))));
  const double new_error = rectified_error_rate(m);

  SpoccModel out = model;
  out.base_tables.push_back(new_table);
  out.error_rates.push_back(error_rate(m));
  out.rectified_error_rates.push_back(new_error);
  AppendReport local;

  if (model.mode == SpoccMode::flat) {
    out.alphas.push_back(0.0);
    out.tables.push_back(std::move(new_table));
    if (report) *report = local;
    return out;
  }

  const auto column = table.column(K);
  std::vector<double> normalized(K), raw(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto other = table.column(k);
    normalized[k] = normalized_dissimilarity(column, other, table.label_count());
    raw[k] = 1.0 - dependence_kappa(column, other, table.label_count());
  }
  const Dendrogram& old_tree = *model.dendrogram;
  auto appended = append_leaf(old_tree, normalized, options.threshold, raw);
  const std::size_t node = appended.placement.node;
  local.joined = appended.placement.joined;
  local.sibling = appended.placement.sibling;
  local.node = node;

  out.dendrogram = std::move(appended.tree);
  out.lambdas.push_back(TNormParam::infinity());
  bool search = true;
  if (local.joined) {
    if (table.columns_equal(K, local.sibling)) {
      search = false;
    } else if (auto p = old_tree.parent(NodeRef::leaf(local.sibling))) {
      out.lambdas[node] = model.lambdas[*p];
      search = false;
    }
  } else {
    ++out.cluster_count;
  }

  if (search) {
    // Single-parameter grid search with existing lambdas frozen and no
    // discounting, mirroring the order used at training time.
    const auto grid = grid_params(options.lambda_grid);
    const auto cells = detail::group_cells(table);
    detail::GraphEvaluator ev(*out.dendrogram, out.lambdas, out.base_tables, cells);
    TNormParam bound = child_bound(*out.dendrogram, ev, node);
    TNormParam best = grid.front();
    double best_acc = -1.0;
    for (TNormParam p : grid) {
      if (bound < p) break;
      ev.set(node, p);
      const double acc = ev.accuracy();
      if (acc > best_acc) {
        best_acc = acc;
        best = p;
      }
    }
    out.lambdas[node] = best;
    local.searched = true;
  }

  const auto alphas = compute_alphas(out.rectified_error_rates, out.rho);
  const double old_best = *std::min_element(model.rectified_error_rates.begin(),
                                            model.rectified_error_rates.end());
  if (new_error < old_best) {
    out.alphas = alphas;
    out.tables = discount_tables(out.base_tables, out.alphas);
  } else {
    out.alphas.push_back(alphas[K]);
    out.tables.push_back(alphas[K] == 0.0 ? new_table : discount_tables({new_table}, {&alphas[K], 1})[0]);
  }
  if (report) *report = local;
  return out;
}

}  // namespace spocc
