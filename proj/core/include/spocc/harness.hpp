#pragma once

// Experiment driver for the synthetic robustness benchmark: exact binomial
// intervals, bootstrap intervals, sequential test sampling, scenario sweeps and
// CSV reports.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spocc/estimation.hpp"
#include "spocc/methods.hpp"
#include "spocc/synthetic.hpp"

namespace spocc {

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  double half_width() const noexcept { return 0.5 * (upper - lower); }
};

/// Exact two-sided binomial interval from beta quantiles.
/// Throws std::invalid_argument when successes > trials or trials == 0.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

struct BootstrapResult {
  double mean = 0.0;
  double half_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap of the sample mean. Throws std::invalid_argument for
/// fewer than two samples or zero resamples.
BootstrapResult bootstrap_ci(std::span<const double> samples, std::mt19937_64& rng,
                             std::size_t resamples = 1000, double level = 0.95);

struct StoppingRule {
  double confidence = 0.95;
  double half_width = 0.002;
  std::size_t batch = 1000;
  std::size_t cap = 1'000'000;
};

struct DynamicTestResult {
  std::uint64_t trials = 0;
  /// The cap was reached before every interval was narrow enough.
  bool truncated = false;
  /// Per predictor; row = true label, column = prediction.
  std::vector<ConfusionMatrix> confusion;

  double accuracy(std::size_t predictor) const;
};

/// Draws one test point, writes each predictor's label into `predicted` and
/// returns the true label.
using TestTrial = std::function<Label(std::mt19937_64& rng, std::span<Label> predicted)>;

/// Samples batches until every predictor's Clopper-Pearson half-width is at
/// most rule.half_width, or the cap is hit.
DynamicTestResult dynamic_test_sample(const TestTrial& trial, std::size_t predictors,
                                      std::size_t labels, const StoppingRule& rule,
                                      std::mt19937_64& rng);

enum class Scenario { adversary, fault, redundancy, heterogeneous, imbalance };
std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

/// Optimal accuracy the square's half-side is calibrated to.
inline constexpr double kTargetOptimalAccuracy = 0.8752;

struct ExperimentConfig {
  Scenario scenario = Scenario::redundancy;
  /// Extra copies of classifier 1 per sweep point, or p(label 0) for imbalance.
  std::vector<double> sweep = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::size_t replicates = 100;
  std::vector<Method> methods = all_methods();
  std::uint64_t seed = 0;
  StoppingRule stopping;
  std::size_t n = 200;
  double validation_fraction = 0.2;
  /// 0 means calibrate to kTargetOptimalAccuracy.
  double half_side = 0.0;
  std::size_t folds = 5;
  double adversary_theta = 0.5;
  double fault_theta = 0.9;
  /// Worker threads over replicates; results do not depend on it.
  std::size_t threads = 1;
  /// Called after each finished replicate with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

struct RunRecord {
  Method method = Method::adaspocc;
  std::size_t sweep_index = 0;
  double sweep = 0.0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  /// Bayes aggregation refused the ensemble size; no accuracy.
  bool intractable = false;
  double accuracy = 0.0;
  std::uint64_t trials = 0;
  bool truncated = false;
  ConfusionMatrix confusion;
};

struct ExperimentReport {
  Method method = Method::adaspocc;
  double sweep = 0.0;
  std::vector<double> samples;
  double mean = 0.0;
  double ci_half_width = 0.0;
  double stddev = 0.0;
  /// l x l, rows = true label, row-normalized.
  std::vector<double> confusion;
  std::vector<std::uint64_t> seeds;
  std::size_t intractable = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::size_t labels = 2;
  std::vector<RunRecord> runs;
  /// Ordered by (method, sweep).
  std::vector<ExperimentReport> reports;

  const ExperimentReport* report(Method m, std::size_t sweep_index) const;
  /// Accuracy samples of one method over every sweep point and replicate.
  std::vector<double> samples(Method m) const;
};

/// Replicate r uses seed config.seed + r; data, base classifiers and
/// perturbations come from independent sub-streams of that seed, so the same
/// replicate shares its base ensemble across sweep points and scenarios.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Accuracies, means and row-normalized confusion matrices pooled over runs.
std::vector<ExperimentReport> summarize(const std::vector<RunRecord>& runs, std::size_t labels,
                                        std::uint64_t seed);

/// Writes accuracies.csv, summary.csv, seeds.csv and confusion_<method>.csv.
void write_reports(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace spocc
