// spocc: train, apply and benchmark classifier aggregators from the shell.
//
// Exit codes: 0 success, 1 other failure, 2 parse error, 3 intractable model,
// 4 numeric failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spocc/error.hpp"
#include "spocc/harness.hpp"
#include "spocc/io.hpp"
#include "spocc/model.hpp"

namespace {

using namespace spocc;

constexpr int kExitParse = 2;
constexpr int kExitIntractable = 3;
constexpr int kExitNumeric = 4;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ParseError("not a number: \"" + s + "\"");
  return v;
}

// "0..8" (inclusive integer range), "lo:hi:step", or a comma-separated list.
std::vector<double> parse_sweep(const std::string& s) {
  std::vector<double> out;
  if (auto dots = s.find(".."); dots != std::string::npos) {
    const double lo = parse_number(s.substr(0, dots)), hi = parse_number(s.substr(dots + 2));
    if (lo != std::floor(lo) || hi != std::floor(hi) || hi < lo)
      throw ParseError("sweep range must be integers lo..hi with lo <= hi");
    for (double v = lo; v <= hi; v += 1.0) out.push_back(v);
    return out;
  }
  if (std::count(s.begin(), s.end(), ':') == 2) {
    const auto parts = [&] {
      std::vector<std::string> p;
      std::stringstream ss(s);
      for (std::string item; std::getline(ss, item, ':');) p.push_back(item);
      return p;
    }();
    const double lo = parse_number(parts[0]), hi = parse_number(parts[1]), step = parse_number(parts[2]);
    if (!(step > 0.0) || hi < lo) throw ParseError("sweep lo:hi:step needs step > 0 and lo <= hi");
    for (std::size_t i = 0;; ++i) {
      const double v = lo + step * static_cast<double>(i);
      if (v > hi + 1e-9 * step) break;
      out.push_back(std::round(v * 1e9) / 1e9);
    }
    return out;
  }
  for (const auto& item : split_list(s)) out.push_back(parse_number(item));
  if (out.empty()) throw ParseError("empty sweep");
  return out;
}

Method method_or_throw(const std::string& name) {
  const auto m = parse_method(name);
  if (!m || !is_aggregator(*m)) {
    std::string known;
    for (Method x : all_methods())
      if (is_aggregator(x)) known += (known.empty() ? "" : ", ") + std::string(to_string(x));
    throw ParseError("unknown method \"" + name + "\" (expected one of: " + known + ")");
  }
  return *m;
}

int cmd_train(const std::string& method_name, const std::string& table_path,
              const std::string& out_path, std::size_t folds, std::uint64_t seed,
              const std::string& labels, double flat_lambda) {
  const Method method = method_or_throw(method_name);
  std::optional<LabelSpace> space;
  if (!labels.empty()) space = LabelSpace(split_list(labels));
  const auto table = read_table_csv(table_path, space);
  TrainOptions opt;
  opt.folds = folds;
  opt.seed = seed;
  opt.flat_lambda = std::isinf(flat_lambda) ? TNormParam::infinity() : TNormParam(flat_lambda);
  const Model model = train_model(method, table, opt);
  save_model(model, out_path);
  std::cerr << "trained " << to_string(method) << " on " << table.rows() << " rows x "
            << table.classifiers() << " classifiers -> " << out_path << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& preds_path,
                const std::string& out_path, std::uint64_t seed) {
  const Model model = load_model(model_path);
  const std::size_t K = model.classifiers();
  const auto preds = read_predictions_csv(preds_path, model.labels(), K);
  std::mt19937_64 rng(seed);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << "y\n";
  for (std::size_t i = 0; i < preds.size() / K; ++i)
    out << model.labels().name(model.predict({preds.data() + i * K, K}, rng)) << '\n';
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& table_path,
             const std::string& report_path, std::uint64_t seed) {
  const Model model = load_model(model_path);
  const auto table = read_table_csv(table_path, model.labels());
  if (table.classifiers() != model.classifiers())
    throw ParseError("table has " + std::to_string(table.classifiers()) +
                     " prediction columns, model expects " + std::to_string(model.classifiers()));
  std::mt19937_64 rng(seed);
  ConfusionMatrix cm(table.label_count());
  for (std::size_t i = 0; i < table.rows(); ++i) ++cm.at(table.truth(i), model.predict(table.row(i), rng));
  const double acc = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  nlohmann::json counts = nlohmann::json::array();
  for (Label t = 0; t < table.label_count(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (Label p = 0; p < table.label_count(); ++p) row.push_back(cm.at(t, p));
    counts.push_back(row);
  }
  nlohmann::json report = {{"method", to_string(model.method())},
                           {"rows", table.rows()},
                           {"accuracy", acc},
                           {"labels", table.labels().names()},
                           {"confusion", counts},
                           {"seed", seed}};
  std::ofstream out(report_path);
  if (!out) throw std::runtime_error("cannot write " + report_path);
  out << report.dump(2) << '\n';
  std::cout << "accuracy " << acc << " on " << table.rows() << " rows\n";
  return 0;
}

int cmd_append(const std::string& model_path, const std::string& table_path,
               const std::string& out_path, double threshold) {
  const Model model = load_model(model_path);
  if (model.method() != Method::spocc && model.method() != Method::adaspocc)
    throw std::invalid_argument("append supports spocc and adaspocc models only");
  const auto table = read_table_csv(table_path, model.labels());
  AppendOptions opt;
  opt.threshold = threshold;
  AppendReport report;
  auto grown = append_classifier(std::get<SpoccModel>(model.body()), table, opt, &report);
  save_model(Model(model.method(), std::move(grown)), out_path);
  if (model.method() == Method::adaspocc)
    std::cerr << (report.joined ? "joined the cluster of classifier " + std::to_string(report.sibling + 1)
                                : std::string("formed a new cluster"))
              << (report.searched ? " (lambda searched)" : "") << "\n";
  return 0;
}

int cmd_bench(const std::string& scenario_name, const std::string& sweep,
              std::size_t replicates, const std::string& out_dir, std::uint64_t seed,
              const std::string& methods, double half_width, std::size_t threads, bool quiet) {
  ExperimentConfig cfg;
  const auto scenario = parse_scenario(scenario_name);
  if (!scenario)
    throw ParseError("unknown scenario \"" + scenario_name +
                     "\" (expected adversary, fault, redundancy, heterogeneous or imbalance)");
  cfg.scenario = *scenario;
  if (!sweep.empty()) {
    cfg.sweep = parse_sweep(sweep);
  } else if (cfg.scenario == Scenario::imbalance) {
    cfg.sweep = parse_sweep("0.05:0.5:0.05");
  }
  cfg.replicates = replicates;
  cfg.seed = seed;
  cfg.stopping.half_width = half_width;
  cfg.threads = threads;
  if (!methods.empty()) {
    cfg.methods.clear();
    for (const auto& name : split_list(methods)) {
      const auto m = parse_method(name);
      if (!m) throw ParseError("unknown method \"" + name + "\"");
      cfg.methods.push_back(*m);
    }
  }
  if (!quiet)
    cfg.progress = [](std::size_t done, std::size_t total) {
      std::cerr << "\rreplicate " << done << "/" << total << std::flush;
      if (done == total) std::cerr << "\n";
    };
  const auto result = run_experiment(cfg);
  write_reports(result, out_dir);
  std::cout << "method,mean\n";
  for (Method m : cfg.methods) {
    const auto s = result.samples(m);
    if (s.empty()) continue;
    double mean = 0;
    for (double v : s) mean += v;
    std::cout << to_string(m) << ',' << mean / static_cast<double>(s.size()) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Possibilistic classifier aggregation (SPOCC / adaSPOCC) and baselines"};
  app.require_subcommand(1);

  std::string method, table, out, labels, model, preds, report, scenario, sweep, methods;
  std::size_t folds = 5, replicates = 100, threads = 1;
  std::uint64_t seed = 0;
  double flat_lambda = 5.0, threshold = 0.5, half_width = 0.002;
  bool quiet = false;

  auto* train = app.add_subcommand("train", "Train an aggregator from a validation table");
  train->add_option("--method", method, "selection, vote, exp-vote, stacking, naive-bayes, bayes, spocc, adaspocc")->required();
  train->add_option("--table", table, "Validation CSV: c_1,...,c_K,y")->required();
  train->add_option("--out", out, "Model JSON to write")->required();
  train->add_option("--folds", folds, "Cross-validation folds for tuned methods");
  train->add_option("--seed", seed, "Seed for fold assignment");
  train->add_option("--labels", labels, "Comma-separated label space (default: sorted names in the table)");
  train->add_option("--flat-lambda", flat_lambda, "T-norm parameter of flat SPOCC (inf for minimum)");

  auto* predict = app.add_subcommand("predict", "Aggregate rows of base-classifier predictions");
  predict->add_option("--model", model, "Model JSON")->required();
  predict->add_option("--preds", preds, "CSV with one column per classifier")->required();
  predict->add_option("--out", out, "Output CSV of predicted labels")->required();
  predict->add_option("--seed", seed, "Seed for tie-breaking");

  auto* eval = app.add_subcommand("eval", "Accuracy and confusion matrix on a labeled table");
  eval->add_option("--model", model, "Model JSON")->required();
  eval->add_option("--table", table, "Test CSV: c_1,...,c_K,y")->required();
  eval->add_option("--report", report, "Report JSON to write")->required();
  eval->add_option("--seed", seed, "Seed for tie-breaking");

  auto* bench = app.add_subcommand("bench", "Run a synthetic robustness benchmark");
  bench->add_option("--scenario", scenario, "adversary, fault, redundancy, heterogeneous, imbalance")->required();
  bench->add_option("--sweep", sweep, "Sweep values: 0..8, lo:hi:step or a comma list");
  bench->add_option("--replicates", replicates, "Replicates per sweep point");
  bench->add_option("--out", out, "Output directory for CSV reports")->required();
  bench->add_option("--seed", seed, "Master seed");
  bench->add_option("--methods", methods, "Comma-separated methods (default: all)");
  bench->add_option("--half-width", half_width, "Clopper-Pearson half-width that stops test sampling");
  bench->add_option("--threads", threads, "Worker threads over replicates");
  bench->add_flag("--quiet", quiet, "No progress output");

  auto* append = app.add_subcommand("append", "Add one classifier to a trained SPOCC model");
  append->add_option("--model", model, "Model JSON")->required();
  append->add_option("--table", table, "Validation CSV with the model's columns plus one")->required();
  append->add_option("--out", out, "Model JSON to write")->required();
  append->add_option("--threshold", threshold, "Join an existing cluster below this dissimilarity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (*train) return cmd_train(method, table, out, folds, seed, labels, flat_lambda);
    if (*predict) return cmd_predict(model, preds, out, seed);
    if (*eval) return cmd_eval(model, table, report, seed);
    if (*bench) return cmd_bench(scenario, sweep, replicates, out, seed, methods, half_width, threads, quiet);
    if (*append) return cmd_append(model, table, out, threshold);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const IntractableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIntractable;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
