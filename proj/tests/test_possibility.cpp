#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spocc/possibility.hpp"

using namespace spocc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TNormParam param(double l) { return std::isinf(l) ? TNormParam::infinity() : TNormParam(l); }

}  // namespace

TEST_CASE("dpt worked examples are exact") {
  CHECK(dpt(std::vector{0.10, 0.15, 0.75}) == std::vector{0.10, 0.25, 1.0});
  CHECK(dpt(std::vector{0.20, 0.60, 0.20}) == std::vector{0.40, 1.0, 0.40});
}

TEST_CASE("dpt of a uniform distribution is vacuous") {
  for (std::size_t l = 2; l <= 7; ++l) {
    std::vector<double> p(l, 1.0 / static_cast<double>(l));
    for (double v : dpt(p)) CHECK(v == 1.0);
  }
}

TEST_CASE("dpt rejects invalid masses") {
  CHECK_THROWS_AS(dpt(std::vector{0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(dpt(std::vector{1.2, -0.2}), std::invalid_argument);
  CHECK_THROWS_AS(dpt(std::vector<double>{}), std::invalid_argument);
  CHECK_NOTHROW(dpt(std::vector{0.5, 0.5 + 5e-10}));
}

TEST_CASE("dpt matches the closed-form sum of minima") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t l = 2 + t % 6;
    const auto p = oracle::random_probability(l, rng, t % 2 == 0);
    const auto got = dpt(p);
    const auto want = oracle::dpt(p);
    for (std::size_t i = 0; i < l; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("dpt consistency and preference preservation") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t l = 2 + t % 5;
    const auto p = oracle::random_probability(l, rng, t % 3 == 0);
    const auto pi = dpt(p);
    CHECK(is_normalized(pi));
    for (unsigned mask = 1; mask < (1u << l); ++mask) {
      std::vector<Label> a;
      double mass = 0.0;
      for (std::size_t i = 0; i < l; ++i)
        if (mask >> i & 1u) {
          a.push_back(static_cast<Label>(i));
          mass += p[i];
        }
      CHECK(possibility_measure(pi, a) >= mass - 1e-9);
    }
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < l; ++j) CHECK((p[i] > p[j]) == (pi[i] > pi[j]));
  }
}

TEST_CASE("dpt is maximally specific on a 0.01 grid") {
  // Any consistent, order-preserving candidate must dominate dpt(p) pointwise.
  std::mt19937_64 rng(13);
  for (int t = 0; t < 40; ++t) {
    const std::size_t l = 2 + t % 2;
    const auto p = oracle::random_probability(l, rng, t % 2 == 0);
    const auto pi = dpt(p);
    std::vector<int> units(l, 0);
    bool done = false;
    while (!done) {
      std::vector<double> cand(l);
      for (std::size_t i = 0; i < l; ++i) cand[i] = units[i] / 100.0;
      bool ok = true;
      for (std::size_t i = 0; i < l && ok; ++i)
        for (std::size_t j = 0; j < l && ok; ++j)
          ok = (p[i] > p[j]) == (cand[i] > cand[j]);
      for (unsigned mask = 1; ok && mask < (1u << l); ++mask) {
        double mass = 0.0, poss = 0.0;
        for (std::size_t i = 0; i < l; ++i)
          if (mask >> i & 1u) {
            mass += p[i];
            poss = std::max(poss, cand[i]);
          }
        ok = poss >= mass - 1e-12;
      }
      if (ok)
        for (std::size_t i = 0; i < l; ++i) CHECK(cand[i] >= pi[i] - 0.01);
      std::size_t i = 0;
      for (; i < l; ++i) {
        if (++units[i] <= 100) break;
        units[i] = 0;
      }
      done = i == l;
    }
  }
}

TEST_CASE("dpt maximal specificity by brute force for four labels") {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 3; ++t) {
    const auto p = oracle::random_probability(4, rng, true);
    const auto pi = dpt(p);
    // Coarser 0.05 lattice keeps 21^4 candidates; tolerance follows the lattice.
    std::vector<int> u(4, 0);
    for (u[0] = 0; u[0] <= 20; ++u[0])
      for (u[1] = 0; u[1] <= 20; ++u[1])
        for (u[2] = 0; u[2] <= 20; ++u[2])
          for (u[3] = 0; u[3] <= 20; ++u[3]) {
            double c[4];
            for (int i = 0; i < 4; ++i) c[i] = u[i] / 20.0;
            bool ok = true;
            for (int i = 0; i < 4 && ok; ++i)
              for (int j = 0; j < 4 && ok; ++j) ok = (p[i] > p[j]) == (c[i] > c[j]);
            for (unsigned mask = 1; ok && mask < 16; ++mask) {
              double mass = 0.0, poss = 0.0;
              for (int i = 0; i < 4; ++i)
                if (mask >> i & 1u) {
                  mass += p[i];
                  poss = std::max(poss, c[i]);
                }
              ok = poss >= mass - 1e-12;
            }
            if (ok)
              for (int i = 0; i < 4; ++i) CHECK(c[i] >= pi[i] - 0.05);
          }
  }
}

TEST_CASE("tnorm_scalar reference values") {
  CHECK(tnorm_scalar(TNormParam(1.0), 0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  for (double l : {1.0, 2.0, 7.5, kInf}) CHECK(tnorm_scalar(param(l), 1.0, 0.7) == 0.7);
  CHECK(tnorm_scalar(TNormParam(2.0), 0.5, 0.5) ==
        doctest::Approx(std::pow(2.0, -std::sqrt(2.0))).epsilon(1e-14));
  CHECK(tnorm_scalar(TNormParam(2.0), 0.5, 0.5) == doctest::Approx(0.375214).epsilon(1e-6));
  CHECK(tnorm_scalar(TNormParam::infinity(), 0.3, 0.8) == 0.3);
  CHECK(tnorm_scalar(TNormParam(3.0), 0.0, 0.8) == 0.0);
  CHECK(tnorm_scalar(TNormParam(3.0), 1e-320, 0.8) == 0.0);
}

TEST_CASE("tnorm_scalar agrees with a long double evaluation") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (double l : {1.0, 1.5, 2.0, 5.0, 20.0, 200.0}) {
    for (int t = 0; t < 500; ++t) {
      const double a = u(rng), b = u(rng);
      CHECK(tnorm_scalar(TNormParam(l), a, b) ==
            doctest::Approx(oracle::tnorm(l, a, b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("TNormParam rejects parameters below one") {
  CHECK_THROWS_AS(TNormParam(0.99), std::invalid_argument);
  CHECK_THROWS_AS(TNormParam(std::nan("")), std::invalid_argument);
  CHECK(TNormParam(kInf).is_infinite());
  CHECK(TNormParam(3.0) < TNormParam::infinity());
  CHECK_FALSE(TNormParam::infinity() < TNormParam::infinity());
}

TEST_CASE("t-norm axioms over a parameter and value grid") {
  const std::vector<double> lambdas{1.0, 1.5, 2.0, 5.0, 20.0, kInf};
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  grid.push_back(1e-5);
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    const auto lam = param(lambdas[li]);
    for (double a : grid) {
      CHECK(tnorm_scalar(lam, a, 1.0) == doctest::Approx(a).epsilon(1e-15));
      CHECK(tnorm_scalar(lam, a, 0.0) == 0.0);
      for (double b : grid) {
        const double ab = tnorm_scalar(lam, a, b);
        CHECK(ab == tnorm_scalar(lam, b, a));
        CHECK(ab <= std::min(a, b) + 1e-12);
        if (li + 1 < lambdas.size())
          CHECK(ab <= tnorm_scalar(param(lambdas[li + 1]), a, b) + 1e-12);
        for (double c : grid) {
          CHECK(std::abs(tnorm_scalar(lam, tnorm_scalar(lam, a, b), c) -
                         tnorm_scalar(lam, a, tnorm_scalar(lam, b, c))) <= 1e-9);
          if (b <= c) CHECK(ab <= tnorm_scalar(lam, a, c) + 1e-15);
        }
      }
    }
  }
}

TEST_CASE("tnorm_combine reference cases") {
  const PossibilityDistribution pi{0.3, 1.0, 0.45};
  std::vector<PossibilityDistribution> twice{pi, pi};
  CHECK(tnorm_combine(TNormParam::infinity(), twice) == pi);
  std::vector<PossibilityDistribution> crossed{{1.0, 0.4}, {0.4, 1.0}};
  const auto prod = tnorm_combine(TNormParam(1.0), crossed);
  CHECK(prod[0] == doctest::Approx(0.4));
  CHECK(prod[1] == doctest::Approx(0.4));
  std::vector<PossibilityDistribution> one{pi};
  CHECK(tnorm_combine(TNormParam(4.0), one) == pi);
  std::vector<PossibilityDistribution> bad{{1.0, 0.5}, {1.0}};
  CHECK_THROWS_AS(tnorm_combine(TNormParam(2.0), bad), std::invalid_argument);
  CHECK_THROWS_AS(tnorm_combine(TNormParam(2.0), std::span<const PossibilityDistribution>{}),
                  std::invalid_argument);
}

TEST_CASE("tnorm_combine equals every pairwise fold order") {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t k = 2 + t % 5, l = 3;
    std::vector<std::vector<double>> dists(k, std::vector<double>(l));
    for (auto& d : dists)
      for (auto& v : d) v = u(rng);
    for (double lam : {1.0, 2.5, 9.0, kInf}) {
      const auto got = tnorm_combine(param(lam), dists);
      auto shuffled = dists;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto want = oracle::tnorm_fold(lam, shuffled);
      for (std::size_t i = 0; i < l; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-9);
    }
  }
}

TEST_CASE("three-operand example: strong single support versus moderate majority") {
  // pi_{1|3} strongly favours label 2, two identical sources moderately favour
  // label 1. Which label wins depends on lambda.
  const std::vector<std::vector<double>> dists{{0.1, 0.25, 1.0}, {0.4, 1.0, 0.4}, {0.4, 1.0, 0.4}};
  auto winner = [&](double lam) {
    const auto pi = tnorm_combine(param(lam), dists);
    const auto best = oracle::argmax_set(pi);
    REQUIRE(best.size() == 1);
    return best.front();
  };
  // Product: (0.016, 0.25, 0.16) -> the majority label.
  CHECK(winner(1.0) == 1);
  // Minimum: (0.1, 0.25, 0.4) -> the strongly supported label.
  CHECK(winner(kInf) == 2);
  // The argmax switches exactly once along the sweep, agreeing with the scalar oracle.
  int switches = 0;
  std::size_t prev = winner(1.0);
  for (double lam = 1.0; lam <= 60.0; lam *= 1.05) {
    const auto want = oracle::argmax_set(oracle::tnorm_fold(lam, dists));
    REQUIRE(want.size() == 1);
    const std::size_t w = winner(lam);
    CHECK(w == want.front());
    if (w != prev) ++switches;
    prev = w;
  }
  CHECK(switches == 1);
  const auto at2 = tnorm_combine(TNormParam(2.0), dists);
  const auto want2 = oracle::tnorm_fold(2.0, dists);
  for (std::size_t i = 0; i < 3; ++i) CHECK(at2[i] == doctest::Approx(want2[i]).epsilon(1e-12));
}

TEST_CASE("discount") {
  const PossibilityDistribution pi{1.0, 0.2, 0.7};
  CHECK(discount(pi, 0.0) == pi);
  for (double v : discount(pi, 1.0)) CHECK(v == 1.0);
  const auto half = discount(std::vector{1.0, 0.2}, 0.5);
  CHECK(half[0] == 1.0);
  CHECK(half[1] == doctest::Approx(0.6));
  CHECK_THROWS_AS(discount(pi, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(discount(pi, 1.1), std::invalid_argument);

  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const auto p = dpt(oracle::random_probability(4, rng));
    const double a = t / 200.0, b = a + 0.005;
    const auto da = discount(p, a), db = discount(p, b);
    CHECK(is_normalized(da));
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(da[i] >= 0.0);
      CHECK(da[i] <= 1.0);
      CHECK(da[i] <= db[i]);
    }
  }
}

TEST_CASE("decide") {
  std::mt19937_64 rng(18);
  CHECK(decide(std::vector{0.2, 1.0, 0.4}, rng) == 1);

  const std::vector<double> tie{1.0, 1.0, 0.0};
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) {
    const Label y = decide(tie, rng);
    CHECK(y != 2);
    zeros += y == 0;
  }
  CHECK(std::abs(zeros / 10000.0 - 0.5) <= 0.02);

  std::vector<int> counts(3, 0);
  for (int i = 0; i < 9000; ++i) ++counts[decide(std::vector{0.0, 0.0, 0.0}, rng)];
  for (int c : counts) CHECK(std::abs(c / 9000.0 - 1.0 / 3.0) <= 0.02);

  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(decide(tie, a) == decide(tie, b));
}

TEST_CASE("argmax set is invariant under positive rescaling") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    auto pi = dpt(oracle::random_probability(5, rng, true));
    const double c = 1.0 - u(rng) * 0.999;
    auto scaled = pi;
    for (auto& v : scaled) v *= c;
    CHECK(argmax_set(pi) == argmax_set(scaled));
  }
}

TEST_CASE("possibility and necessity measures") {
  const std::vector<double> pi{1.0, 1.0, 0.0};
  CHECK(possibility_measure(pi, std::vector<Label>{0, 1}) == 1.0);
  CHECK(possibility_measure(pi, std::vector<Label>{2}) == 0.0);
  CHECK(possibility_measure(std::vector{0.3, 0.7, 0.5}, std::vector<Label>{0, 2}) == 0.5);
  CHECK(necessity_measure(pi, std::vector<Label>{0, 1}) == 1.0);
  CHECK(necessity_measure(pi, std::vector<Label>{0}) == 0.0);
  CHECK(necessity_measure(std::vector{0.2, 1.0, 0.6}, std::vector<Label>{0, 1, 2}) == 1.0);
  CHECK_THROWS_AS(possibility_measure(pi, std::vector<Label>{}), std::invalid_argument);
  CHECK_THROWS_AS(possibility_measure(pi, std::vector<Label>{3}), std::out_of_range);

  std::mt19937_64 rng(20);
  for (int t = 0; t < 200; ++t) {
    const auto p = dpt(oracle::random_probability(4, rng));
    const std::vector<Label> a{0, 2}, b{1}, ab{0, 1, 2}, rest{1, 3};
    CHECK(possibility_measure(p, ab) ==
          std::max(possibility_measure(p, a), possibility_measure(p, b)));
    CHECK(necessity_measure(p, a) == doctest::Approx(1.0 - possibility_measure(p, rest)));
  }
}
