#include <algorithm>
#include <array>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spocc/error.hpp"
#include "spocc/io.hpp"
#include "spocc/model.hpp"

using namespace spocc;

namespace {

std::size_t parse_error_line(const std::string& text,
                             const std::optional<LabelSpace>& labels = {}) {
  std::istringstream in(text);
  try {
    read_table_csv(in, labels);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("table CSV parsing") {
  std::istringstream in("c_1,c_2,y\ncat,dog,cat\ndog,dog,bird\n");
  const auto t = read_table_csv(in);
  CHECK(t.labels().names() == std::vector<std::string>{"bird", "cat", "dog"});
  CHECK(t.classifiers() == 2);
  CHECK(t.rows() == 2);
  CHECK(t.prediction(0, 1) == 2);
  CHECK(t.truth(1) == 0);

  std::ostringstream out;
  write_table_csv(out, t);
  std::istringstream back(out.str());
  const auto t2 = read_table_csv(back, t.labels());
  CHECK(t2.column(0) == t.column(0));
  CHECK(t2.column(1) == t.column(1));
  CHECK(std::ranges::equal(t2.truths(), t.truths()));
}

TEST_CASE("malformed CSV reports the offending line") {
  CHECK(parse_error_line("c_1,c_2,y\na,b,a\na,b\n") == 3);
  CHECK(parse_error_line("c_1,y\na,b\n\nb,a,a\n") >= 3);
  const LabelSpace ab({"a", "b"});
  CHECK(parse_error_line("c_1,y\na,b\nb,zebra\n", ab) == 3);

  std::istringstream in("c_1,y\na,b\nb,zebra\n");
  try {
    read_table_csv(in, ab);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("zebra") != std::string::npos);
    CHECK(what.find("a") != std::string::npos);
    CHECK(what.find("b") != std::string::npos);
  }
}

TEST_CASE("prediction rows") {
  const LabelSpace ab({"a", "b"});
  std::istringstream in("c_1,c_2\na,b\nb,b\n");
  CHECK(read_predictions_csv(in, ab, 2) == std::vector<Label>{0, 1, 1, 1});
  std::istringstream with_truth("c_1,c_2,y\na,b,a\n");
  CHECK(read_predictions_csv(with_truth, ab, 2) == std::vector<Label>{0, 1});
  std::istringstream short_row("c_1,c_2\na\n");
  CHECK_THROWS_AS(read_predictions_csv(short_row, ab, 2), ParseError);
}

TEST_CASE("dataset CSV round-trip") {
  std::mt19937_64 rng(91);
  GaussianQuadrantConfig cfg;
  cfg.n = 50;
  const auto d = generate(cfg, rng);
  std::ostringstream out;
  write_dataset_csv(out, d);
  std::istringstream in(out.str());
  const auto back = read_dataset_csv(in);
  CHECK(back.y == d.y);
  CHECK(back.x == d.x);
  std::istringstream bad("x1,x2,y\n1.0,abc,0\n");
  CHECK_THROWS_AS(read_dataset_csv(bad), ParseError);
}

TEST_CASE("every model kind survives a JSON round-trip") {
  std::mt19937_64 rng(92);
  const std::array<double, 4> acc{0.8, 0.7, 0.65, 0.6};
  auto table = oracle::noisy_table(600, acc, 3, rng);
  table = table.with_column(table.column(1));
  const auto test = oracle::random_table(300, 5, 3, rng);
  TrainOptions opts;
  opts.folds = 3;
  for (Method m : all_methods()) {
    if (!is_aggregator(m)) continue;
    CAPTURE(to_string(m));
    const auto model = train_model(m, table, opts);
    const auto text = model_to_json(model);
    const auto back = model_from_json(text);
    CHECK(back.method() == m);
    CHECK(model_to_json(back) == text);
    for (std::size_t r = 0; r < test.rows(); ++r)
      CHECK(back.scores(test.row(r)) == model.scores(test.row(r)));
  }
  CHECK_THROWS_AS(model_from_json("{"), ParseError);
  CHECK_THROWS_AS(model_from_json(R"({"format":"other/9"})"), ParseError);
}

TEST_CASE("dendrogram JSON round-trip is exact") {
  const Dendrogram g(4, {{NodeRef::leaf(0), NodeRef::leaf(1), 0.125},
                         {NodeRef::leaf(2), NodeRef::leaf(3), 0.3333333333333333},
                         {NodeRef::internal(0), NodeRef::internal(1), 0.9}});
  const LambdaArray lambdas{TNormParam::infinity(), TNormParam(2.718281828459045),
                            TNormParam(1.0)};
  const auto text = dendrogram_to_json(g, lambdas);
  const auto [g2, l2] = dendrogram_from_json(text);
  CHECK(g2 == g);
  CHECK(l2 == lambdas);
  for (std::size_t a = 0; a < 3; ++a) CHECK(g2.internal(a).height == g.internal(a).height);
  CHECK(text.find("\"inf\"") != std::string::npos);
  CHECK_THROWS(dendrogram_from_json(R"({"leaves":2,"nodes":[]})"));
}
