#include "spocc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "spocc/error.hpp"

namespace spocc {

using nlohmann::json;

namespace {

constexpr std::pair<Method, std::string_view> kMethodNames[] = {
    {Method::selection, "selection"},     {Method::vote, "vote"},
    {Method::exp_vote, "exp-vote"},       {Method::stacking, "stacking"},
    {Method::naive_bayes, "naive-bayes"}, {Method::bayes, "bayes"},
    {Method::spocc, "spocc"},             {Method::adaspocc, "adaspocc"},
    {Method::best_base, "best-base"},     {Method::optimal, "optimal"}};

}  // namespace

std::string_view to_string(Method m) {
  for (auto [k, v] : kMethodNames)
    if (k == m) return v;
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (auto [k, v] : kMethodNames)
    if (v == name) return k;
  return std::nullopt;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> m;
    for (auto [k, v] : kMethodNames) m.push_back(k);
    return m;
  }();
  return methods;
}

bool is_aggregator(Method m) { return m != Method::best_base && m != Method::optimal; }

std::vector<double> SelectionModel::scores(std::span<const Label> preds) const {
  if (preds.size() != classifiers)
    throw std::invalid_argument("prediction vector length does not match the ensemble size");
  if (preds[selected] >= labels.size()) throw std::out_of_range("predicted label out of range");
  std::vector<double> s(labels.size(), 0.0);
  s[preds[selected]] = 1.0;
  return s;
}

Model::Model(Method method, Body body) : method_(method), body_(std::move(body)) {
  bool ok = false;
  switch (method) {
    case Method::selection: ok = std::holds_alternative<SelectionModel>(body_); break;
    case Method::vote:
    case Method::exp_vote: ok = std::holds_alternative<VoteModel>(body_); break;
    case Method::stacking: ok = std::holds_alternative<StackingModel>(body_); break;
    case Method::naive_bayes: ok = std::holds_alternative<NaiveBayesModel>(body_); break;
    case Method::bayes: ok = std::holds_alternative<BayesAggModel>(body_); break;
    case Method::spocc:
      ok = std::holds_alternative<SpoccModel>(body_) &&
           std::get<SpoccModel>(body_).mode == SpoccMode::flat;
      break;
    case Method::adaspocc:
      ok = std::holds_alternative<SpoccModel>(body_) &&
           std::get<SpoccModel>(body_).mode == SpoccMode::adaptive;
      break;
    default: break;
  }
  if (!ok) throw std::invalid_argument("model body does not match method " + std::string(to_string(method)));
}

const LabelSpace& Model::labels() const {
  return std::visit([](const auto& b) -> const LabelSpace& { return b.labels; }, body_);
}

std::size_t Model::classifiers() const {
  return std::visit(
      [](const auto& b) -> std::size_t {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, VoteModel>) return b.weights.size();
        else if constexpr (std::is_same_v<T, SpoccModel>) return b.classifiers();
        else return b.classifiers;
      },
      body_);
}

std::vector<double> Model::scores(std::span<const Label> preds) const {
  return std::visit(
      [&](const auto& b) -> std::vector<double> {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, NaiveBayesModel>) return b.log_scores(preds);
        else if constexpr (std::is_same_v<T, BayesAggModel>) return b.posterior(preds);
        else if constexpr (std::is_same_v<T, SpoccModel>) return b.aggregate(preds);
        else return b.scores(preds);
      },
      body_);
}

Label Model::predict(std::span<const Label> preds, std::mt19937_64& rng) const {
  return decide(scores(preds), rng);
}

Model train_model(Method method, const ValidationTable& table, const TrainOptions& options) {
  switch (method) {
    case Method::selection: {
      SelectionModel m;
      m.labels = table.labels();
      m.classifiers = table.classifiers();
      m.accuracies = accuracies(table);
      m.selected = select_best(table);
      return {method, m};
    }
    case Method::vote: return {method, train_weighted_vote(table)};
    case Method::exp_vote:
      return {method, train_exp_weighted_vote(table, default_temperature_grid(), options.folds,
                                              options.seed)};
    case Method::stacking: {
      StackingOptions opt;
      opt.folds = options.folds;
      opt.seed = options.seed;
      return {method, stacking_train(table, opt)};
    }
    case Method::naive_bayes: return {method, naive_bayes_train(table)};
    case Method::bayes: return {method, bayes_agg_train(table)};
    case Method::spocc: return {method, train_spocc(table, options.flat_lambda)};
    case Method::adaspocc: {
      AdaSpoccOptions opt;
      opt.folds = options.folds;
      opt.seed = options.seed;
      return {method, train_adaspocc(table, opt)};
    }
    default: break;
  }
  throw std::invalid_argument(std::string(to_string(method)) + " is not a trainable aggregator");
}

namespace {

json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ParseError("expected a number or \"inf\", got \"" + s + "\"");
  }
  if (!j.is_number()) throw ParseError("expected a number");
  return j.get<double>();
}

json lambda_json(TNormParam p) { return number(p.value()); }
TNormParam to_lambda(const json& j) {
  const double v = to_number(j);
  return std::isinf(v) ? TNormParam::infinity() : TNormParam(v);
}

json numbers(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> to_numbers(const json& j) {
  if (!j.is_array()) throw ParseError("expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(to_number(x));
  return out;
}

json tables_json(const PossibilityTables& t) {
  json a = json::array();
  for (const auto& per_k : t) {
    json b = json::array();
    for (const auto& pi : per_k) b.push_back(numbers(pi));
    a.push_back(b);
  }
  return a;
}

PossibilityTables to_tables(const json& j) {
  if (!j.is_array()) throw ParseError("expected possibility tables");
  PossibilityTables out;
  for (const auto& per_k : j) {
    if (!per_k.is_array()) throw ParseError("expected a table per classifier");
    out.emplace_back();
    for (const auto& pi : per_k) out.back().push_back(to_numbers(pi));
  }
  return out;
}

json dendrogram_node_json(const Dendrogram& g, std::span<const TNormParam> lambdas) {
  const std::size_t K = g.leaf_count();
  auto id = [K](NodeRef r) { return r.is_leaf ? r.index : K + r.index; };
  json nodes = json::array();
  for (std::size_t a = 0; a < g.internal_count(); ++a) {
    const auto& n = g.internal(a);
    json node = {{"id", K + a}, {"children", {id(n.left), id(n.right)}}, {"height", n.height}};
    if (!lambdas.empty()) node["lambda"] = lambda_json(lambdas[a]);
    nodes.push_back(node);
  }
  return {{"leaves", K}, {"nodes", nodes}};
}

std::pair<Dendrogram, LambdaArray> dendrogram_from(const json& j) {
  if (!j.is_object() || !j.contains("leaves") || !j.contains("nodes"))
    throw ParseError("dendrogram needs \"leaves\" and \"nodes\"");
  const auto K = j.at("leaves").get<std::size_t>();
  const auto& nodes = j.at("nodes");
  std::vector<InternalNode> internals(nodes.size());
  LambdaArray lambdas;
  bool has_lambdas = true;
  auto ref = [K, &nodes](std::size_t id) {
    if (id < K) return NodeRef::leaf(id);
    if (id - K >= nodes.size()) throw ParseError("dendrogram child id " + std::to_string(id) + " out of range");
    return NodeRef::internal(id - K);
  };
  for (const auto& n : nodes) {
    const auto id = n.at("id").get<std::size_t>();
    if (id < K || id - K >= nodes.size()) throw ParseError("dendrogram node id out of range");
    const auto& ch = n.at("children");
    if (!ch.is_array() || ch.size() != 2) throw ParseError("dendrogram node needs two children");
    internals[id - K] = {ref(ch[0].get<std::size_t>()), ref(ch[1].get<std::size_t>()),
                         n.at("height").get<double>()};
    has_lambdas = has_lambdas && n.contains("lambda");
  }
  if (has_lambdas) {
    lambdas.assign(nodes.size(), TNormParam(1.0));
    for (const auto& n : nodes) lambdas[n.at("id").get<std::size_t>() - K] = to_lambda(n.at("lambda"));
  }
  try {
    return {Dendrogram(K, std::move(internals)), std::move(lambdas)};
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid dendrogram: ") + e.what());
  }
}

json body_json(const SelectionModel& m) {
  return {{"selected", m.selected}, {"accuracies", numbers(m.accuracies)}};
}
json body_json(const VoteModel& m) {
  return {{"accuracies", numbers(m.accuracies)},
          {"weights", numbers(m.weights)},
          {"temperature", m.temperature}};
}
json body_json(const StackingModel& m) {
  return {{"l2", m.l2},
          {"coefficients", numbers(m.coefficients)},
          {"converged", m.converged},
          {"iterations", m.iterations}};
}
json body_json(const NaiveBayesModel& m) {
  return {{"log_prior", numbers(m.log_prior)}, {"log_likelihood", numbers(m.log_likelihood)}};
}
json body_json(const BayesAggModel& m) {
  std::map<std::uint64_t, std::vector<std::uint64_t>> sorted(m.counts.begin(), m.counts.end());
  json cells = json::array();
  for (const auto& [cell, counts] : sorted) cells.push_back({{"cell", cell}, {"counts", counts}});
  return {{"cells", cells}};
}
json body_json(const SpoccModel& m) {
  json j = {{"mode", m.mode == SpoccMode::flat ? "flat" : "adaptive"},
            {"tables", tables_json(m.tables)},
            {"base_tables", tables_json(m.base_tables)},
            {"error_rates", numbers(m.error_rates)},
            {"rectified_error_rates", numbers(m.rectified_error_rates)},
            {"alphas", numbers(m.alphas)},
            {"rho", number(m.rho)},
            {"flat_lambda", lambda_json(m.flat_lambda)},
            {"cluster_count", m.cluster_count}};
  if (m.dendrogram) j["dendrogram"] = dendrogram_node_json(*m.dendrogram, m.lambdas);
  return j;
}

Model::Body body_from(Method method, const json& j, const LabelSpace& labels, std::size_t K) {
  switch (method) {
    case Method::selection: {
      SelectionModel m{labels, K, j.at("selected").get<std::size_t>(), to_numbers(j.at("accuracies"))};
      if (m.selected >= K) throw ParseError("selected classifier out of range");
      return m;
    }
    case Method::vote:
    case Method::exp_vote: {
      VoteModel m;
      m.labels = labels;
      m.accuracies = to_numbers(j.at("accuracies"));
      m.weights = to_numbers(j.at("weights"));
      m.temperature = j.at("temperature").get<double>();
      if (m.weights.size() != K) throw ParseError("one vote weight per classifier required");
      return m;
    }
    case Method::stacking: {
      StackingModel m;
      m.labels = labels;
      m.classifiers = K;
      m.l2 = j.at("l2").get<double>();
      m.coefficients = to_numbers(j.at("coefficients"));
      m.converged = j.at("converged").get<bool>();
      m.iterations = j.at("iterations").get<std::size_t>();
      if (m.coefficients.size() != (K * labels.size() + 1) * labels.size())
        throw ParseError("stacking coefficient count does not match the ensemble");
      return m;
    }
    case Method::naive_bayes: {
      NaiveBayesModel m;
      m.labels = labels;
      m.classifiers = K;
      m.log_prior = to_numbers(j.at("log_prior"));
      m.log_likelihood = to_numbers(j.at("log_likelihood"));
      const std::size_t l = labels.size();
      if (m.log_prior.size() != l || m.log_likelihood.size() != K * l * l)
        throw ParseError("naive Bayes tables do not match the ensemble");
      return m;
    }
    case Method::bayes: {
      BayesAggModel m;
      m.labels = labels;
      m.classifiers = K;
      for (const auto& c : j.at("cells")) {
        auto counts = c.at("counts").get<std::vector<std::uint64_t>>();
        if (counts.size() != labels.size()) throw ParseError("Bayes cell needs one count per label");
        m.counts[c.at("cell").get<std::uint64_t>()] = std::move(counts);
      }
      return m;
    }
    case Method::spocc:
    case Method::adaspocc: {
      SpoccModel m;
      m.labels = labels;
      const auto mode = j.at("mode").get<std::string>();
      if (mode != "flat" && mode != "adaptive") throw ParseError("unknown SPOCC mode \"" + mode + "\"");
      m.mode = mode == "flat" ? SpoccMode::flat : SpoccMode::adaptive;
      m.tables = to_tables(j.at("tables"));
      m.base_tables = to_tables(j.at("base_tables"));
      m.error_rates = to_numbers(j.at("error_rates"));
      m.rectified_error_rates = to_numbers(j.at("rectified_error_rates"));
      m.alphas = to_numbers(j.at("alphas"));
      m.rho = to_number(j.at("rho"));
      m.flat_lambda = to_lambda(j.at("flat_lambda"));
      m.cluster_count = j.at("cluster_count").get<std::size_t>();
      if (j.contains("dendrogram")) {
        auto [tree, lambdas] = dendrogram_from(j.at("dendrogram"));
        if (lambdas.size() != tree.internal_count()) throw ParseError("dendrogram lacks lambdas");
        m.dendrogram = std::move(tree);
        m.lambdas = std::move(lambdas);
      }
      const std::size_t l = labels.size();
      auto shaped = [&](const PossibilityTables& t) {
        if (t.size() != K) return false;
        for (const auto& per_k : t) {
          if (per_k.size() != l) return false;
          for (const auto& pi : per_k)
            if (pi.size() != l) return false;
        }
        return true;
      };
      if (!shaped(m.tables) || !shaped(m.base_tables) || m.alphas.size() != K ||
          m.error_rates.size() != K || m.rectified_error_rates.size() != K)
        throw ParseError("SPOCC tables do not match the ensemble");
      if (m.mode == SpoccMode::adaptive && (!m.dendrogram || m.dendrogram->leaf_count() != K))
        throw ParseError("adaptive SPOCC model needs a dendrogram with one leaf per classifier");
      return m;
    }
    default: break;
  }
  throw ParseError("method " + std::string(to_string(method)) + " has no stored model");
}

}  // namespace

std::string model_to_json(const Model& model) {
  json j;
  j["format"] = kModelFormat;
  j["method"] = to_string(model.method());
  j["labels"] = model.labels().names();
  j["classifiers"] = model.classifiers();
  j["model"] = std::visit([](const auto& b) { return body_json(b); }, model.body());
  return j.dump(2) + "\n";
}

Model model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kModelFormat)
      throw ParseError("model JSON: expected format \"" + std::string(kModelFormat) + "\"");
    const auto name = j.at("method").get<std::string>();
    const auto method = parse_method(name);
    if (!method || !is_aggregator(*method)) throw ParseError("model JSON: unknown method \"" + name + "\"");
    LabelSpace labels(j.at("labels").get<std::vector<std::string>>());
    const auto K = j.at("classifiers").get<std::size_t>();
    if (K == 0) throw ParseError("model JSON: no classifiers");
    return Model(*method, body_from(*method, j.at("model"), labels, K));
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model_to_json(model);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

std::string dendrogram_to_json(const Dendrogram& tree, std::span<const TNormParam> lambdas) {
  if (!lambdas.empty() && lambdas.size() != tree.internal_count())
    throw std::invalid_argument("one lambda per internal node required");
  return dendrogram_node_json(tree, lambdas).dump();
}

std::pair<Dendrogram, LambdaArray> dendrogram_from_json(std::string_view text) {
  try {
    return dendrogram_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("dendrogram JSON: ") + e.what());
  }
}

}  // namespace spocc
