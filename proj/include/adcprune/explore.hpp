#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "adcprune/chromosome.hpp"
#include "adcprune/run_config.hpp"

namespace adcprune {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

struct ArchivePoint {
  std::size_t id = 0;
  std::uint64_t eval_index = 0;
  Chromosome genome;
  double accuracy_miss = 1.0;
  double accuracy = 0.0;
  double test_accuracy = 0.0;
  double area = 0.0;
  double normalized_area = 0.0;
  std::vector<AreaEstimate> per_input;
};

struct ExploreResult {
  EvolutionResult<Chromosome> evolution;
  std::vector<ArchivePoint> pareto;
  EvalResult baseline;
  double conventional_area = 0.0;
};

/// Runs the GA for `config` on `dataset`. The seeded population starts with
/// the conventional baseline, so `baseline` is individual 0.
ExploreResult run_exploration(const RunConfig& config, std::shared_ptr<const Dataset> dataset,
                              std::ostream* progress = nullptr);

/// Writes config.json, generations.csv, pareto.csv, pareto.json,
/// population.json and environment.json into `dir`.
void write_artifact(const RunConfig& config, const Dataset& dataset, const ExploreResult& result,
                    const std::filesystem::path& dir);

/// Output directory after applying $ADCPRUNE_OUTPUT_ROOT to relative paths.
std::filesystem::path resolve_output_dir(const std::filesystem::path& configured);

struct PointReport {
  EvalResult result;
  double conventional_area = 0.0;
  double normalized_area = 0.0;
};

/// Trains and scores one chromosome under `config` (eval index 0).
PointReport evaluate_point(const RunConfig& config, std::shared_ptr<const Dataset> dataset,
                           const Chromosome& chromosome);

void print_point_report(std::ostream& os, const Dataset& dataset, const Chromosome& chromosome,
                        const PointReport& report);

/// Accepts a bare chromosome object or any object carrying one under
/// "chromosome" (a pareto.json point).
Chromosome chromosome_from_document(const nlohmann::json& j, int adc_bits);

}  // namespace adcprune
