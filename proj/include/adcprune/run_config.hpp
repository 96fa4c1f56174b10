#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include "adcprune/chromosome.hpp"
#include "adcprune/dataset.hpp"
#include "adcprune/nsga2.hpp"
#include "json.hpp"

namespace adcprune {

/// Bad configuration or usage; the CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Either a manifest dataset name or a CSV path with its schema.
struct DatasetRef {
  std::string name;
  std::filesystem::path path;
  CsvSchema schema;
};

struct RunConfig {
  DatasetRef dataset;
  ProblemSetup setup;
  GaParams ga;
  MutationRates mutation;
  std::filesystem::path output_dir = "runs/latest";
  std::uint64_t seed = 1;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the offending key. `seed` drives both the GA and the
/// split/training seeds. Relative dataset paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully expanded form; parse_run_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

/// Loads the referenced dataset and rejects it if too small to train on.
std::shared_ptr<const Dataset> load_dataset(const DatasetRef& ref, LoadReport* report = nullptr);

}  // namespace adcprune
