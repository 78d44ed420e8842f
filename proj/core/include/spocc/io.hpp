#pragma once

// CSV input and output for validation tables, prediction rows and datasets.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "spocc/estimation.hpp"
#include "spocc/synthetic.hpp"

namespace spocc {

/// Header `c_1,...,c_K,y`, one row per example, cells are label names. Without
/// `labels` the label space is the sorted set of names found in the file.
/// Throws ParseError (with the 1-based line) on malformed input or unknown names.
ValidationTable read_table_csv(std::istream& in, const std::optional<LabelSpace>& labels = {});
ValidationTable read_table_csv(const std::filesystem::path& path,
                               const std::optional<LabelSpace>& labels = {});
void write_table_csv(std::ostream& out, const ValidationTable& table);
void write_table_csv(const std::filesystem::path& path, const ValidationTable& table);

/// Prediction rows with K columns (a trailing `y` column is ignored).
/// Returns the row-major labels.
std::vector<Label> read_predictions_csv(std::istream& in, const LabelSpace& labels,
                                        std::size_t classifiers);
std::vector<Label> read_predictions_csv(const std::filesystem::path& path,
                                        const LabelSpace& labels, std::size_t classifiers);

/// Header `x1,...,xd,y`; numeric features, integer labels.
Dataset read_dataset_csv(std::istream& in);
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace spocc
