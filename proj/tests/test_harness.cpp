#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "doctest.h"
#include "spocc/harness.hpp"

using namespace spocc;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(Scenario s) {
  ExperimentConfig cfg;
  cfg.scenario = s;
  cfg.sweep = {0, 2};
  cfg.replicates = 3;
  cfg.methods = {Method::vote, Method::spocc, Method::adaspocc, Method::best_base,
                 Method::optimal};
  cfg.seed = 99;
  cfg.stopping = {0.95, 0.03, 300, 3000};
  cfg.folds = 3;
  return cfg;
}

}  // namespace

TEST_CASE("clopper_pearson") {
  const auto ci = clopper_pearson(7, 10);
  CHECK(std::abs(ci.lower - 0.3475) < 5e-4);
  CHECK(std::abs(ci.upper - 0.9333) < 5e-4);
  // Cross-check against boost's own exact binomial bounds.
  using boost::math::binomial_distribution;
  CHECK(ci.lower == doctest::Approx(binomial_distribution<>::find_lower_bound_on_p(10, 7, 0.025)));
  CHECK(ci.upper == doctest::Approx(binomial_distribution<>::find_upper_bound_on_p(10, 7, 0.025)));

  const auto all = clopper_pearson(50, 50);
  CHECK(all.upper == 1.0);
  CHECK(all.lower == doctest::Approx(std::pow(0.025, 1.0 / 50)));
  CHECK(clopper_pearson(0, 20).lower == 0.0);
  CHECK_THROWS_AS(clopper_pearson(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson(0, 0), std::invalid_argument);
}

TEST_CASE("bootstrap_ci") {
  std::mt19937_64 rng(81);
  const std::vector<double> constant(50, 0.7);
  const auto c = bootstrap_ci(constant, rng);
  CHECK(c.half_width == 0.0);
  CHECK(c.mean == doctest::Approx(0.7));

  std::vector<double> coins(1000);
  for (std::size_t i = 0; i < coins.size(); ++i) coins[i] = static_cast<double>(i % 2);
  const auto b = bootstrap_ci(coins, rng);
  const double clt = 1.96 * 0.5 / std::sqrt(1000.0);
  CHECK(std::abs(b.half_width - clt) < 0.15 * clt);
  CHECK(b.lower <= b.mean);
  CHECK(b.mean <= b.upper);

  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(bootstrap_ci(one, rng), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_ci(coins, rng, 0), std::invalid_argument);
}

TEST_CASE("dynamic test sampling") {
  std::mt19937_64 rng(82);
  SUBCASE("a perfect predictor stops after the first batches") {
    const TestTrial perfect = [](std::mt19937_64& r, std::span<Label> out) {
      const Label y = static_cast<Label>(r() % 2);
      out[0] = y;
      return y;
    };
    const auto res = dynamic_test_sample(perfect, 1, 2, {}, rng);
    CHECK(res.trials <= 2000);
    CHECK(res.accuracy(0) == 1.0);
    CHECK_FALSE(res.truncated);
  }
  SUBCASE("a coin flip needs the normal-approximation sample size") {
    const TestTrial coin = [](std::mt19937_64& r, std::span<Label> out) {
      out[0] = static_cast<Label>(r() % 2);
      return static_cast<Label>(r() % 2);
    };
    const auto res = dynamic_test_sample(coin, 1, 2, {}, rng);
    const double expected = std::pow(1.96 / (2 * 0.002), 2);
    CHECK(std::abs(res.trials - expected) < 0.2 * expected);
    const auto ci = clopper_pearson(res.confusion[0].trace(), res.trials);
    CHECK(ci.half_width() <= 0.002);
  }
  SUBCASE("the widest interval governs stopping") {
    const TestTrial pair = [](std::mt19937_64& r, std::span<Label> out) {
      const Label y = static_cast<Label>(r() % 2);
      out[0] = y;
      out[1] = static_cast<Label>(r() % 2);
      return y;
    };
    const auto res = dynamic_test_sample(pair, 2, 2, {}, rng);
    CHECK(res.trials > 100000);
    CHECK(res.confusion[0].total() == res.trials);
  }
  SUBCASE("the cap truncates") {
    const TestTrial coin = [](std::mt19937_64& r, std::span<Label> out) {
      out[0] = static_cast<Label>(r() % 2);
      return static_cast<Label>(r() % 2);
    };
    const auto res = dynamic_test_sample(coin, 1, 2, {0.95, 0.002, 500, 5000}, rng);
    CHECK(res.truncated);
    CHECK(res.trials == 5000);
  }
}

TEST_CASE("scenario names round-trip") {
  for (auto s : {Scenario::adversary, Scenario::fault, Scenario::redundancy,
                 Scenario::heterogeneous, Scenario::imbalance})
    CHECK(parse_scenario(to_string(s)) == s);
  CHECK_FALSE(parse_scenario("nonsense").has_value());
}

TEST_CASE("experiment runs are deterministic and self-consistent") {
  const auto cfg = small_config(Scenario::redundancy);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  REQUIRE(a.runs.size() == b.runs.size());
  CHECK(a.runs.size() == cfg.sweep.size() * cfg.replicates * cfg.methods.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) CHECK(a.runs[i].accuracy == b.runs[i].accuracy);

  CHECK(a.reports.size() == cfg.sweep.size() * cfg.methods.size());
  for (const auto& r : a.reports) {
    CHECK(r.samples.size() == cfg.replicates);
    double row_sum_check = 0.0, diag = 0.0;
    for (std::size_t y = 0; y < a.labels; ++y) {
      double row = 0.0;
      for (std::size_t j = 0; j < a.labels; ++j) row += r.confusion[y * a.labels + j];
      CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
      row_sum_check += row;
      diag += r.confusion[y * a.labels + y];
    }
    CHECK(row_sum_check == doctest::Approx(static_cast<double>(a.labels)));
    CHECK(diag >= 0.0);
  }

  // Weighted diagonal of the pooled confusion equals pooled accuracy.
  for (const auto& run : a.runs) {
    double right = 0.0;
    for (Label y = 0; y < a.labels; ++y) right += static_cast<double>(run.confusion.at(y, y));
    CHECK(right / static_cast<double>(run.confusion.total()) ==
          doctest::Approx(run.accuracy).epsilon(1e-6));
  }

  // The adversary sweep at zero shares the redundancy sweep's ensemble.
  auto adv_cfg = cfg;
  adv_cfg.scenario = Scenario::adversary;
  const auto adv = run_experiment(adv_cfg);
  for (auto m : cfg.methods)
    CHECK(adv.report(m, 0)->samples == a.report(m, 0)->samples);

  // Thread count does not change results.
  auto threaded = cfg;
  threaded.threads = 3;
  const auto c = run_experiment(threaded);
  for (std::size_t i = 0; i < a.runs.size(); ++i) CHECK(a.runs[i].accuracy == c.runs[i].accuracy);
}

TEST_CASE("reports are written and reproducible") {
  const auto cfg = small_config(Scenario::fault);
  const auto dir = std::filesystem::temp_directory_path() / "spocc_harness_test";
  std::filesystem::remove_all(dir);
  write_reports(run_experiment(cfg), dir / "a");
  write_reports(run_experiment(cfg), dir / "b");
  for (const char* f : {"accuracies.csv", "summary.csv", "seeds.csv", "confusion_adaspocc.csv"}) {
    const auto one = slurp(dir / "a" / f);
    CHECK_FALSE(one.empty());
    CHECK(one == slurp(dir / "b" / f));
  }
  std::ifstream acc(dir / "a" / "accuracies.csv");
  std::string header;
  std::getline(acc, header);
  CHECK(header.rfind("method,sweep,replicate,accuracy", 0) == 0);
  std::size_t lines = 0;
  for (std::string line; std::getline(acc, line);) ++lines;
  CHECK(lines == cfg.sweep.size() * cfg.replicates * cfg.methods.size());
  std::filesystem::remove_all(dir);
}

TEST_CASE("summarize pools runs per method and sweep point") {
  std::vector<RunRecord> runs;
  for (std::size_t r = 0; r < 4; ++r) {
    RunRecord rec;
    rec.method = Method::vote;
    rec.replicate = r;
    rec.accuracy = 0.5 + 0.1 * static_cast<double>(r);
    rec.confusion = ConfusionMatrix(2);
    rec.confusion.at(0, 0) = 5 + r;
    rec.confusion.at(0, 1) = 5 - r;
    rec.confusion.at(1, 1) = 10;
    runs.push_back(rec);
  }
  const auto reports = summarize(runs, 2, 7);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].mean == doctest::Approx(0.65));
  CHECK(reports[0].samples.size() == 4);
  CHECK(reports[0].confusion[0] + reports[0].confusion[1] == doctest::Approx(1.0));
  CHECK(reports[0].confusion[3] == doctest::Approx(1.0));
  CHECK(reports[0].confusion[0] == doctest::Approx(26.0 / 40.0));
  CHECK(summarize(runs, 2, 7)[0].ci_half_width == reports[0].ci_half_width);
}
