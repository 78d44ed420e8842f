#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace spocc {

/// Aggregation methods plus the two reference predictors of the benchmark.
enum class Method {
  selection,
  vote,
  exp_vote,
  stacking,
  naive_bayes,
  bayes,
  spocc,
  adaspocc,
  best_base,
  optimal
};

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);
/// Every method, in declaration order.
const std::vector<Method>& all_methods();
/// True for methods trained from a validation table (not the references).
bool is_aggregator(Method m);

}  // namespace spocc
