#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "spocc/io.hpp"
#include "spocc/model.hpp"

using namespace spocc;
namespace fs = std::filesystem;

namespace {

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / ("spocc_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Workdir() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code = 0;
  std::string err;
};

Run cli(const std::string& args, const Workdir& w) {
  const std::string err = w / "stderr.txt";
  const std::string cmd = std::string(SPOCC_CLI_PATH) + " " + args + " >" + (w / "stdout.txt") +
                          " 2>" + err;
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

// Every prediction vector of k classifiers over the table's labels, as CSV.
void write_all_vectors(const std::string& path, const LabelSpace& labels, std::size_t k,
                       std::ptrdiff_t duplicate_of = -1) {
  std::ofstream out(path);
  for (std::size_t c = 0; c < k; ++c) out << (c ? "," : "") << "c_" << c + 1;
  if (duplicate_of >= 0) out << ",c_" << k + 1;
  out << '\n';
  for (const auto& v : oracle::all_vectors(k, labels.size())) {
    for (std::size_t c = 0; c < k; ++c) out << (c ? "," : "") << labels.name(v[c]);
    if (duplicate_of >= 0) out << ',' << labels.name(v[static_cast<std::size_t>(duplicate_of)]);
    out << '\n';
  }
}

ValidationTable make_table() {
  std::mt19937_64 rng(101);
  const std::array<double, 3> acc{0.8, 0.7, 0.65};
  return oracle::noisy_table(600, acc, 3, rng);
}

}  // namespace

TEST_CASE("train, predict and eval") {
  Workdir w;
  const auto table = make_table();
  write_table_csv(fs::path(w / "val.csv"), table);
  for (const char* method : {"adaspocc", "spocc", "vote", "stacking", "bayes"}) {
    CAPTURE(method);
    const std::string model = w / (std::string(method) + ".json");
    REQUIRE(cli(std::string("train --method ") + method + " --table " + (w / "val.csv") +
                    " --out " + model + " --folds 3 --seed 4",
                w)
                .code == 0);
    REQUIRE(cli("predict --model " + model + " --preds " + (w / "val.csv") + " --out " +
                    (w / "a.csv") + " --seed 9",
                w)
                .code == 0);
    REQUIRE(cli("predict --model " + model + " --preds " + (w / "val.csv") + " --out " +
                    (w / "b.csv") + " --seed 9",
                w)
                .code == 0);
    CHECK(slurp(w / "a.csv") == slurp(w / "b.csv"));
    CHECK(count_lines(w / "a.csv") == table.rows() + 1);

    // The CLI's in-sample predictions equal the library's with the same seed.
    const auto loaded = load_model(model);
    std::mt19937_64 rng(9);
    std::ifstream in(w / "a.csv");
    std::string line;
    std::getline(in, line);
    std::size_t right = 0;
    for (std::size_t i = 0; i < table.rows(); ++i) {
      std::getline(in, line);
      const Label p = loaded.predict(table.row(i), rng);
      CHECK(line == table.labels().name(p));
      right += p == table.truth(i);
    }

    REQUIRE(cli("eval --model " + model + " --table " + (w / "val.csv") + " --report " +
                    (w / "r.json") + " --seed 9",
                w)
                .code == 0);
    const auto report = nlohmann::json::parse(slurp(w / "r.json"));
    CHECK(report["accuracy"].get<double>() ==
          doctest::Approx(right / static_cast<double>(table.rows())));
    CHECK(report["rows"].get<std::size_t>() == table.rows());
  }
}

TEST_CASE("appending a duplicate column leaves predictions unchanged") {
  Workdir w;
  const auto table = make_table();
  write_table_csv(fs::path(w / "val.csv"), table);
  REQUIRE(cli("train --method adaspocc --table " + (w / "val.csv") + " --out " + (w / "m.json"),
              w)
              .code == 0);
  for (std::size_t dup = 0; dup < 3; ++dup) {
    write_table_csv(fs::path(w / "ext.csv"), table.with_column(table.column(dup)));
    REQUIRE(cli("append --model " + (w / "m.json") + " --table " + (w / "ext.csv") + " --out " +
                    (w / "m2.json"),
                w)
                .code == 0);
    const auto before = load_model(w / "m.json");
    const auto after = load_model(w / "m2.json");
    CHECK(after.classifiers() == 4);
    for (const auto& v : oracle::all_vectors(3, 3)) {
      auto ext = v;
      ext.push_back(v[dup]);
      CHECK(oracle::argmax_set(after.scores(ext)) == oracle::argmax_set(before.scores(v)));
    }
    // End to end through predict with a shared seed.
    write_all_vectors(w / "v3.csv", table.labels(), 3);
    write_all_vectors(w / "v4.csv", table.labels(), 3, static_cast<std::ptrdiff_t>(dup));
    REQUIRE(cli("predict --model " + (w / "m.json") + " --preds " + (w / "v3.csv") + " --out " +
                    (w / "p3.csv") + " --seed 1",
                w)
                .code == 0);
    REQUIRE(cli("predict --model " + (w / "m2.json") + " --preds " + (w / "v4.csv") + " --out " +
                    (w / "p4.csv") + " --seed 1",
                w)
                .code == 0);
    CHECK(slurp(w / "p3.csv") == slurp(w / "p4.csv"));
  }
}

TEST_CASE("bench writes one summary row per method and sweep point") {
  Workdir w;
  const auto r = cli("bench --scenario redundancy --sweep 0..8 --replicates 1 --methods "
                     "vote,adaspocc --half-width 0.05 --quiet --out " +
                         (w / "out"),
                     w);
  REQUIRE(r.code == 0);
  CHECK(count_lines(w / "out/summary.csv") == 9 * 2 + 1);
  CHECK(count_lines(w / "out/accuracies.csv") == 9 * 2 + 1);
  CHECK(fs::exists(w / "out/confusion_adaspocc.csv"));
}

TEST_CASE("errors exit non-zero with a clear message") {
  Workdir w;
  {
    std::ofstream bad(w / "bad.csv");
    bad << "c_1,c_2,y\na,b,a\na,b\n";
  }
  // 2: malformed input, 1: other failures.
  auto r = cli("train --method vote --table " + (w / "bad.csv") + " --out " + (w / "m.json"), w);
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);

  {
    std::ofstream ok(w / "ok.csv");
    ok << "c_1,y\na,b\nb,a\na,a\n";
    std::ofstream unknown(w / "unknown.csv");
    unknown << "c_1,y\na,zebra\n";
  }
  REQUIRE(cli("train --method spocc --table " + (w / "ok.csv") + " --out " + (w / "m.json"), w)
              .code == 0);
  r = cli("eval --model " + (w / "m.json") + " --table " + (w / "unknown.csv") + " --report " +
              (w / "r.json"),
          w);
  CHECK(r.code == 2);
  CHECK(r.err.find("zebra") != std::string::npos);

  r = cli("train --method nonsense --table " + (w / "ok.csv") + " --out " + (w / "m.json"), w);
  CHECK(r.code == 2);
  CHECK(r.err.find("adaspocc") != std::string::npos);

  r = cli("append --model " + (w / "m.json") + " --table " + (w / "ok.csv") + " --out " +
              (w / "m2.json"),
          w);
  CHECK(r.code == 1);
}
