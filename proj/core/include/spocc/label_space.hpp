#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spocc {

/// Canonical label identifier: an index into a LabelSpace.
using Label = std::uint32_t;

/// Ordered set of class-label names. Index i is the label's identity everywhere else.
class LabelSpace {
 public:
  LabelSpace() = default;

  /// Throws std::invalid_argument unless there are at least two distinct names.
  explicit LabelSpace(std::vector<std::string> names);

  /// Labels named "0", "1", ..., "count-1".
  static LabelSpace numbered(std::size_t count);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(Label label) const { return names_.at(label); }

  std::optional<Label> find(std::string_view name) const;

  /// Like find(), but throws ParseError listing the label space when the name is unknown.
  Label resolve(std::string_view name) const;

  bool operator==(const LabelSpace&) const = default;

 private:
  std::vector<std::string> names_;
};

}  // namespace spocc
