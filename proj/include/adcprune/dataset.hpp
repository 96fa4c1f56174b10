#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adcprune {

/// How to read a delimited text table.
///
/// Columns are named by header text or by integer position (negative counts
/// from the end, so "-1" is the last column). `delimiter` is a single
/// character, "tab", or "whitespace" (runs of blanks and tabs).
struct CsvSchema {
  std::string label_column = "-1";
  std::string delimiter = ",";
  bool header = true;
  std::vector<std::string> drop_columns;
  std::vector<std::string> missing_tokens{"", "?", "NA", "NaN", "nan"};
};

/// Splits one line into trimmed cells under the schema's delimiter.
std::vector<std::string> split_cells(std::string_view line, std::string_view delimiter);

/// Labelled table with every feature min-max normalised to [0, 1].
struct Dataset {
  std::string name;
  std::size_t features = 0;
  std::vector<double> values;  // samples x features, row-major
  std::vector<int> labels;     // dense ids 0..C-1
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // dense id -> label text in the file
  std::vector<double> feature_min;       // raw range before normalisation
  std::vector<double> feature_max;

  std::size_t samples() const noexcept { return labels.size(); }
  int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * features, features};
  }
  std::vector<std::size_t> class_counts() const;
};

struct LoadReport {
  Dataset dataset;
  std::size_t dropped_rows = 0;              // malformed or missing cells
  std::vector<std::size_t> constant_features;  // normalised to 0
};

/// Parses, drops unusable rows, maps labels to dense ids (numeric order when
/// every label is numeric, lexicographic otherwise) and normalises.
/// Throws std::runtime_error when no usable row remains.
LoadReport parse_csv(std::string_view text, const CsvSchema& schema, std::string name);
LoadReport load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::string name = {});

/// Rejects datasets too small to train on: fewer than 10 samples or 2 classes.
void validate_for_training(const Dataset& ds);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

/// Seeded stratified split. |train| = round(frac * S) and each class receives
/// floor or ceil of its exact share (largest remainder, ties to the lower
/// class id). Requires >= 2 samples per class and a non-empty test side.
Split stratified_split(const Dataset& ds, double train_frac, std::uint64_t seed);

/// Same rule applied to a subset of sample indices (e.g. carving a
/// validation set out of the training indices).
Split stratified_split(const Dataset& ds, std::span<const std::size_t> pool, double train_frac,
                       std::uint64_t seed);

}  // namespace adcprune
