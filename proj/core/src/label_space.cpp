#include "spocc/label_space.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "spocc/error.hpp"

namespace spocc {

LabelSpace::LabelSpace(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) throw std::invalid_argument("label space needs at least two labels");
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) throw std::invalid_argument("label names must be unique");
}

LabelSpace LabelSpace::numbered(std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) names.push_back(std::to_string(i));
  return LabelSpace(std::move(names));
}

std::optional<Label> LabelSpace::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<Label>(it - names_.begin());
}

Label LabelSpace::resolve(std::string_view name) const {
  if (auto label = find(name)) return *label;
  std::string known;
  for (const auto& n : names_) known += (known.empty() ? "" : ", ") + n;
  throw ParseError("unknown label '" + std::string(name) + "'; label space is {" + known + "}");
}

}  // namespace spocc
