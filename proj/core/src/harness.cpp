#include "spocc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "spocc/error.hpp"
#include "spocc/model.hpp"

namespace spocc {

Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) throw std::invalid_argument("clopper_pearson: no trials");
  if (successes > trials) throw std::invalid_argument("clopper_pearson: successes > trials");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("clopper_pearson: confidence outside (0, 1)");
  const double alpha = 1.0 - confidence;
  const auto s = static_cast<double>(successes), n = static_cast<double>(trials);
  Interval iv;
  iv.lower = successes == 0 ? 0.0 : boost::math::ibeta_inv(s, n - s + 1.0, alpha / 2.0);
  iv.upper = successes == trials ? 1.0 : boost::math::ibeta_inv(s + 1.0, n - s, 1.0 - alpha / 2.0);
  return iv;
}

namespace {

double quantile(std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

BootstrapResult bootstrap_ci(std::span<const double> samples, std::mt19937_64& rng,
                             std::size_t resamples, double level) {
  if (samples.size() < 2) throw std::invalid_argument("bootstrap_ci: need at least two samples");
  if (resamples == 0) throw std::invalid_argument("bootstrap_ci: need at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_ci: level outside (0, 1)");
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<double> means(resamples);
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) s += samples[pick(rng)];
    m = s / static_cast<double>(samples.size());
  }
  std::sort(means.begin(), means.end());
  BootstrapResult r;
  r.mean = mean_of(samples);
  r.lower = quantile(means, (1.0 - level) / 2.0);
  r.upper = quantile(means, 1.0 - (1.0 - level) / 2.0);
  r.half_width = 0.5 * (r.upper - r.lower);
  return r;
}

double DynamicTestResult::accuracy(std::size_t predictor) const {
  const auto& m = confusion.at(predictor);
  return m.total() ? static_cast<double>(m.trace()) / static_cast<double>(m.total()) : 0.0;
}

DynamicTestResult dynamic_test_sample(const TestTrial& trial, std::size_t predictors,
                                      std::size_t labels, const StoppingRule& rule,
                                      std::mt19937_64& rng) {
  if (predictors == 0) throw std::invalid_argument("dynamic_test_sample: no predictors");
  if (!(rule.half_width > 0.0 && rule.half_width < 0.5))
    throw std::invalid_argument("dynamic_test_sample: half-width outside (0, 0.5)");
  if (rule.batch == 0) throw std::invalid_argument("dynamic_test_sample: zero batch size");
  DynamicTestResult r;
  r.confusion.assign(predictors, ConfusionMatrix(labels));
  std::vector<Label> predicted(predictors);
  while (true) {
    for (std::size_t b = 0; b < rule.batch && r.trials < rule.cap; ++b) {
      const Label truth = trial(rng, predicted);
      for (std::size_t p = 0; p < predictors; ++p) ++r.confusion[p].at(truth, predicted[p]);
      ++r.trials;
    }
    bool narrow = true;
    for (const auto& m : r.confusion)
      if (clopper_pearson(m.trace(), m.total(), rule.confidence).half_width() > rule.half_width) {
        narrow = false;
        break;
      }
    if (narrow) return r;
    if (r.trials >= rule.cap) {
      r.truncated = true;
      return r;
    }
  }
}

namespace {

constexpr std::pair<Scenario, std::string_view> kScenarioNames[] = {
    {Scenario::adversary, "adversary"},         {Scenario::fault, "fault"},
    {Scenario::redundancy, "redundancy"},       {Scenario::heterogeneous, "heterogeneous"},
    {Scenario::imbalance, "imbalance"}};
}  // namespace

std::string_view to_string(Scenario s) {
  for (auto [k, v] : kScenarioNames)
    if (k == s) return v;
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (auto [k, v] : kScenarioNames)
    if (v == name) return k;
  return std::nullopt;
}

const ExperimentReport* ExperimentResult::report(Method m, std::size_t sweep_index) const {
  const double value = config.sweep.at(sweep_index);
  for (const auto& r : reports)
    if (r.method == m && r.sweep == value) return &r;
  return nullptr;
}

std::vector<double> ExperimentResult::samples(Method m) const {
  std::vector<double> out;
  for (const auto& r : runs)
    if (r.method == m && !r.intractable) out.push_back(r.accuracy);
  return out;
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::initializer_list<std::uint32_t> tags) {
  std::vector<std::uint32_t> v{static_cast<std::uint32_t>(seed),
                               static_cast<std::uint32_t>(seed >> 32)};
  v.insert(v.end(), tags);
  std::seed_seq seq(v.begin(), v.end());
  return std::mt19937_64(seq);
}

constexpr std::size_t kBaseCount = 4;

struct BaseEnsemble {
  GaussianQuadrantConfig generator;
  Dataset data;
  std::vector<std::size_t> validation;
  std::vector<BaseClassifier> classifiers;
};

BaseEnsemble build_base(const ExperimentConfig& cfg, double half_side, std::uint64_t seed,
                        std::optional<double> beta) {
  BaseEnsemble b;
  b.generator.half_side = half_side;
  b.generator.n = cfg.n;
  b.generator.beta = beta;
  auto data_rng = stream(seed, {1});
  b.data = generate(b.generator, data_rng);

  auto split_rng = stream(seed, {2});
  std::vector<std::size_t> order(b.data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto n_val = static_cast<std::size_t>(
      std::lround(cfg.validation_fraction * static_cast<double>(order.size())));
  if (n_val == 0 || n_val >= order.size())
    throw std::invalid_argument("run_experiment: validation split leaves an empty part");
  b.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> pool(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(b.validation.begin(), b.validation.end());
  std::sort(pool.begin(), pool.end());

  auto subsets = split_overlapping(b.data, pool);
  for (std::size_t k = 0; k < kBaseCount; ++k)
    if (subsets[k].empty()) subsets[k] = pool;
  if (cfg.scenario == Scenario::heterogeneous) {
    b.classifiers.push_back(train_logistic(b.data, subsets[0]));
    b.classifiers.push_back(train_knn(b.data, subsets[1]));
    b.classifiers.push_back(train_depth2_tree(b.data, subsets[2]));
    b.classifiers.push_back(train_depth2_tree(b.data, subsets[3]));
  } else {
    for (std::size_t k = 0; k < kBaseCount; ++k)
      b.classifiers.push_back(train_depth2_tree(b.data, subsets[k]));
  }
  return b;
}

struct Extra {
  PerturbationKind kind;
  double theta;
};

std::vector<Extra> extras_for(const ExperimentConfig& cfg, double sweep) {
  if (cfg.scenario == Scenario::imbalance) return {};
  if (sweep < 0 || sweep != std::floor(sweep))
    throw std::invalid_argument("run_experiment: sweep values must be non-negative copy counts");
  Extra e{PerturbationKind::clone, 0.0};
  if (cfg.scenario == Scenario::adversary) e = {PerturbationKind::adversarial, cfg.adversary_theta};
  if (cfg.scenario == Scenario::fault) e = {PerturbationKind::fault, cfg.fault_theta};
  return std::vector<Extra>(static_cast<std::size_t>(sweep), e);
}

// Scores per distinct prediction vector, computed once and memoized.
class ScoreCache {
 public:
  ScoreCache(std::size_t labels, std::function<std::vector<double>(std::span<const Label>)> f)
      : labels_(labels), f_(std::move(f)) {}
  const std::vector<double>& operator()(std::span<const Label> preds) {
    std::uint64_t key = 0;
    for (Label p : preds) key = key * labels_ + p;
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, f_(preds)).first;
    return it->second;
  }

 private:
  std::size_t labels_;
  std::function<std::vector<double>(std::span<const Label>)> f_;
  std::unordered_map<std::uint64_t, std::vector<double>> cache_;
};

std::vector<RunRecord> run_replicate(const ExperimentConfig& cfg, double half_side,
                                     std::size_t replicate) {
  const std::uint64_t seed = cfg.seed + replicate;
  const std::size_t l = 2;
  std::vector<RunRecord> records;
  std::optional<BaseEnsemble> shared;

  for (std::size_t si = 0; si < cfg.sweep.size(); ++si) {
    const double sweep = cfg.sweep[si];
    std::optional<BaseEnsemble> own;
    if (cfg.scenario == Scenario::imbalance) {
      if (!(sweep >= 0.0 && sweep <= 1.0))
        throw std::invalid_argument("run_experiment: imbalance sweep values must lie in [0, 1]");
      own = build_base(cfg, half_side, seed, sweep);
    } else if (!shared) {
      shared = build_base(cfg, half_side, seed, std::nullopt);
    }
    const BaseEnsemble& base = own ? *own : *shared;
    const auto extras = extras_for(cfg, sweep);
    const std::size_t K = kBaseCount + extras.size();

    std::vector<Label> preds, truths;
    std::vector<std::mt19937_64> copy_rng;
    for (std::size_t j = 0; j < extras.size(); ++j)
      copy_rng.push_back(stream(seed, {3, static_cast<std::uint32_t>(j)}));
    for (std::size_t r : base.validation) {
      auto x = base.data.point(r);
      std::vector<Label> row;
      for (const auto& c : base.classifiers) row.push_back(c.predict(x));
      for (std::size_t j = 0; j < extras.size(); ++j)
        row.push_back(perturb_label(row[0], extras[j].kind, extras[j].theta, l, copy_rng[j]));
      preds.insert(preds.end(), row.begin(), row.end());
      truths.push_back(base.data.y[r]);
    }
    const ValidationTable table(LabelSpace::numbered(l), K, std::move(preds), std::move(truths));

    std::vector<Method> aggregators;
    std::vector<ScoreCache> scorers;
    std::vector<Method> refused;
    for (Method m : cfg.methods) {
      if (!is_aggregator(m)) continue;
      try {
        auto model = std::make_shared<Model>(train_model(m, table, {cfg.folds, seed}));
        scorers.emplace_back(l, [model](std::span<const Label> p) { return model->scores(p); });
        aggregators.push_back(m);
      } catch (const IntractableError&) {
        refused.push_back(m);
      }
    }

    // Predictors: aggregators, then the unperturbed base classifiers, then the
    // Bayes-optimal rule.
    const std::size_t n_agg = aggregators.size();
    const std::size_t predictors = n_agg + kBaseCount + 1;
    std::vector<Label> row(K);
    GaussianQuadrantConfig one = base.generator;
    one.n = 1;
    TestTrial trial = [&](std::mt19937_64& rng, std::span<Label> out) {
      Dataset d = generate(one, rng);
      auto p = d.point(0);
      for (std::size_t k = 0; k < kBaseCount; ++k) row[k] = base.classifiers[k].predict(p);
      for (std::size_t j = 0; j < extras.size(); ++j)
        row[kBaseCount + j] = perturb_label(row[0], extras[j].kind, extras[j].theta, l, rng);
      for (std::size_t a = 0; a < n_agg; ++a) out[a] = decide(scorers[a](row), rng);
      for (std::size_t k = 0; k < kBaseCount; ++k) out[n_agg + k] = row[k];
      out[n_agg + kBaseCount] = optimal_label(base.generator, p);
      return d.y[0];
    };
    auto test_rng = stream(seed, {4, static_cast<std::uint32_t>(si)});
    const auto result = dynamic_test_sample(trial, predictors, l, cfg.stopping, test_rng);

    auto record = [&](Method m, std::size_t p) {
      RunRecord rec;
      rec.method = m;
      rec.sweep_index = si;
      rec.sweep = sweep;
      rec.replicate = replicate;
      rec.seed = seed;
      rec.accuracy = result.accuracy(p);
      rec.trials = result.trials;
      rec.truncated = result.truncated;
      rec.confusion = result.confusion[p];
      return rec;
    };
    for (Method m : cfg.methods) {
      if (m == Method::best_base) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < kBaseCount; ++k)
          if (result.accuracy(n_agg + k) > result.accuracy(n_agg + best)) best = k;
        records.push_back(record(m, n_agg + best));
      } else if (m == Method::optimal) {
        records.push_back(record(m, n_agg + kBaseCount));
      } else if (auto it = std::find(aggregators.begin(), aggregators.end(), m);
                 it != aggregators.end()) {
        records.push_back(record(m, static_cast<std::size_t>(it - aggregators.begin())));
      } else {
        RunRecord rec;
        rec.method = m;
        rec.sweep_index = si;
        rec.sweep = sweep;
        rec.replicate = replicate;
        rec.seed = seed;
        rec.intractable = true;
        rec.confusion = ConfusionMatrix(l);
        records.push_back(rec);
      }
    }
  }
  return records;
}

}  // namespace

std::vector<ExperimentReport> summarize(const std::vector<RunRecord>& runs, std::size_t labels,
                                        std::uint64_t seed) {
  std::map<std::pair<Method, std::size_t>, std::vector<const RunRecord*>> groups;
  for (const auto& r : runs) groups[{r.method, r.sweep_index}].push_back(&r);
  std::vector<ExperimentReport> out;
  for (const auto& [key, members] : groups) {
    ExperimentReport rep;
    rep.method = key.first;
    rep.sweep = members.front()->sweep;
    std::vector<double> joint(labels * labels, 0.0);
    for (const RunRecord* r : members) {
      rep.seeds.push_back(r->seed);
      if (r->intractable) {
        ++rep.intractable;
        continue;
      }
      rep.samples.push_back(r->accuracy);
      const double total = static_cast<double>(r->confusion.total());
      for (Label i = 0; i < labels; ++i)
        for (Label j = 0; j < labels; ++j)
          joint[i * labels + j] += static_cast<double>(r->confusion.at(i, j)) / total;
    }
    if (!rep.samples.empty()) {
      rep.mean = mean_of(rep.samples);
      double ss = 0.0;
      for (double s : rep.samples) ss += (s - rep.mean) * (s - rep.mean);
      if (rep.samples.size() >= 2) {
        rep.stddev = std::sqrt(ss / static_cast<double>(rep.samples.size() - 1));
        auto rng = stream(seed, {5, static_cast<std::uint32_t>(key.first),
                                 static_cast<std::uint32_t>(key.second)});
        rep.ci_half_width = bootstrap_ci(rep.samples, rng).half_width;
      }
      rep.confusion.assign(labels * labels, 0.0);
      for (std::size_t i = 0; i < labels; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < labels; ++j) row += joint[i * labels + j];
        for (std::size_t j = 0; j < labels; ++j)
          rep.confusion[i * labels + j] = row > 0.0 ? joint[i * labels + j] / row : 0.0;
      }
    }
    out.push_back(std::move(rep));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.replicates == 0) throw std::invalid_argument("run_experiment: zero replicates");
  if (config.sweep.empty()) throw std::invalid_argument("run_experiment: empty sweep");
  ExperimentResult result;
  result.config = config;
  result.labels = 2;
  const double half_side =
      config.half_side > 0.0 ? config.half_side : calibrate_half_side(kTargetOptimalAccuracy);

  std::vector<std::vector<RunRecord>> per_replicate(config.replicates);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t r; (r = next++) < config.replicates;) {
      try {
        per_replicate[r] = run_replicate(config, half_side, r);
      } catch (...) {
        std::lock_guard lock(progress_mutex);
        if (!failure) failure = std::current_exception();
        next = config.replicates;
        return;
      }
      const std::size_t finished = ++done;
      if (config.progress) {
        std::lock_guard lock(progress_mutex);
        config.progress(finished, config.replicates);
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, config.replicates));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& recs : per_replicate)
    for (auto& r : recs) result.runs.push_back(std::move(r));
  std::stable_sort(result.runs.begin(), result.runs.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.method, a.sweep_index, a.replicate) < std::tie(b.method, b.sweep_index, b.replicate);
  });
  result.reports = summarize(result.runs, result.labels, config.seed);
  return result;
}

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string sweep_label(double v) { return fmt(v, "%.10g"); }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace

void write_reports(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "accuracies.csv");
    out << "method,sweep,replicate,accuracy\n";
    for (const auto& r : result.runs) {
      if (r.intractable) continue;
      out << to_string(r.method) << ',' << sweep_label(r.sweep) << ',' << r.replicate << ','
          << fmt(r.accuracy) << '\n';
    }
  }
  {
    auto out = open_out(dir / "seeds.csv");
    out << "replicate,seed\n";
    for (std::size_t r = 0; r < result.config.replicates; ++r)
      out << r << ',' << result.config.seed + r << '\n';
  }
  {
    auto out = open_out(dir / "summary.csv");
    out << "method,sweep,replicates,mean,ci_half_width,std,intractable\n";
    for (const auto& rep : result.reports)
      out << to_string(rep.method) << ',' << sweep_label(rep.sweep) << ',' << rep.samples.size()
          << ',' << fmt(rep.mean) << ',' << fmt(rep.ci_half_width) << ',' << fmt(rep.stddev) << ','
          << rep.intractable << '\n';
  }
  const std::size_t l = result.labels;
  std::map<Method, std::vector<const ExperimentReport*>> by_method;
  for (const auto& rep : result.reports) by_method[rep.method].push_back(&rep);
  for (const auto& [method, reps] : by_method) {
    auto out = open_out(dir / ("confusion_" + std::string(to_string(method)) + ".csv"));
    out << "sweep,truth,predicted,rate\n";
    for (const ExperimentReport* rep : reps) {
      if (rep->confusion.empty()) continue;
      for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j)
          out << sweep_label(rep->sweep) << ',' << i << ',' << j << ','
              << fmt(rep->confusion[i * l + j]) << '\n';
    }
  }
}

}  // namespace spocc
