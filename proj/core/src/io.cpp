#include "spocc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "spocc/error.hpp"

namespace spocc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct CsvRows {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
};

CsvRows read_csv(std::istream& in) {
  CsvRows csv;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (csv.header.empty()) {
      csv.header = std::move(fields);
      for (const auto& h : csv.header)
        if (h.empty()) throw ParseError("empty column name in header", number);
      continue;
    }
    if (fields.size() != csv.header.size())
      throw ParseError("expected " + std::to_string(csv.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       number);
    for (const auto& f : fields)
      if (f.empty()) throw ParseError("empty field", number);
    csv.rows.push_back(std::move(fields));
    csv.lines.push_back(number);
  }
  if (csv.header.empty()) throw ParseError("empty file: missing header");
  return csv;
}

Label resolve_at(const LabelSpace& labels, const std::string& name, std::size_t line) {
  if (auto l = labels.find(name)) return *l;
  try {
    return labels.resolve(name);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line);
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

}  // namespace

ValidationTable read_table_csv(std::istream& in, const std::optional<LabelSpace>& labels) {
  const auto csv = read_csv(in);
  if (csv.header.size() < 2) throw ParseError("table needs at least one prediction column and y", 1);
  if (csv.header.back() != "y") throw ParseError("last header column must be \"y\"", 1);
  if (csv.rows.empty()) throw ParseError("table has no rows");
  LabelSpace space;
  if (labels) {
    space = *labels;
  } else {
    std::set<std::string> names;
    for (const auto& row : csv.rows) names.insert(row.begin(), row.end());
    if (names.size() < 2)
      throw ParseError("the table mentions fewer than two labels; pass the label space explicitly");
    space = LabelSpace({names.begin(), names.end()});
  }
  const std::size_t K = csv.header.size() - 1;
  std::vector<Label> preds, truths;
  preds.reserve(csv.rows.size() * K);
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    for (std::size_t k = 0; k < K; ++k) preds.push_back(resolve_at(space, csv.rows[r][k], csv.lines[r]));
    truths.push_back(resolve_at(space, csv.rows[r][K], csv.lines[r]));
  }
  return ValidationTable(std::move(space), K, std::move(preds), std::move(truths));
}

ValidationTable read_table_csv(const std::filesystem::path& path,
                               const std::optional<LabelSpace>& labels) {
  auto in = open_in(path);
  return read_table_csv(in, labels);
}

void write_table_csv(std::ostream& out, const ValidationTable& table) {
  for (std::size_t k = 0; k < table.classifiers(); ++k) out << "c_" << k + 1 << ',';
  out << "y\n";
  const auto& labels = table.labels();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (Label p : table.row(i)) out << labels.name(p) << ',';
    out << labels.name(table.truth(i)) << '\n';
  }
}

void write_table_csv(const std::filesystem::path& path, const ValidationTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_table_csv(out, table);
}

std::vector<Label> read_predictions_csv(std::istream& in, const LabelSpace& labels,
                                        std::size_t classifiers) {
  const auto csv = read_csv(in);
  std::size_t columns = csv.header.size();
  if (columns == classifiers + 1 && csv.header.back() == "y") --columns;
  if (columns != classifiers)
    throw ParseError("expected " + std::to_string(classifiers) + " prediction columns, found " +
                         std::to_string(columns),
                     1);
  std::vector<Label> out;
  out.reserve(csv.rows.size() * classifiers);
  for (std::size_t r = 0; r < csv.rows.size(); ++r)
    for (std::size_t k = 0; k < classifiers; ++k)
      out.push_back(resolve_at(labels, csv.rows[r][k], csv.lines[r]));
  return out;
}

std::vector<Label> read_predictions_csv(const std::filesystem::path& path,
                                        const LabelSpace& labels, std::size_t classifiers) {
  auto in = open_in(path);
  return read_predictions_csv(in, labels, classifiers);
}

Dataset read_dataset_csv(std::istream& in) {
  const auto csv = read_csv(in);
  if (csv.header.size() < 2 || csv.header.back() != "y")
    throw ParseError("dataset header must be x1,...,xd,y", 1);
  Dataset d;
  d.dims = csv.header.size() - 1;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    for (std::size_t f = 0; f < d.dims; ++f) {
      try {
        std::size_t used = 0;
        d.x.push_back(std::stod(row[f], &used));
        if (used != row[f].size()) throw std::invalid_argument(row[f]);
      } catch (const std::exception&) {
        throw ParseError("not a number: \"" + row[f] + "\"", csv.lines[r]);
      }
    }
    Label y = 0;
    const auto& s = row.back();
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), y);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ParseError("label must be a non-negative integer: \"" + s + "\"", csv.lines[r]);
    d.y.push_back(y);
  }
  return d;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t f = 0; f < data.dims; ++f) out << 'x' << f + 1 << ',';
  out << "y\n";
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.point(i)) out << v << ',';
    out << data.y[i] << '\n';
  }
}

}  // namespace spocc
