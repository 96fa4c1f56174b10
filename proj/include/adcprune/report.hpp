#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace adcprune {

struct FrontPoint {
  std::size_t id = 0;
  double accuracy = 0.0;
  double normalized_area = 0.0;
};

struct RunSummary {
  std::string name;  // dataset name
  std::filesystem::path dir;
  double baseline_accuracy = 0.0;
  double conventional_area = 0.0;
  std::vector<FrontPoint> points;
};

/// Reads pareto.json from a run directory.
RunSummary load_run_summary(const std::filesystem::path& run_dir);

/// Points sorted by area whose accuracy beats every cheaper point: the
/// accuracy-vs-area front, monotone non-decreasing in both coordinates.
std::vector<FrontPoint> staircase(std::vector<FrontPoint> points);

/// Cheapest point whose accuracy is at least baseline - max_loss.
std::optional<FrontPoint> best_within_loss(const RunSummary& run, double max_loss);

/// Accuracy (%) versus normalized area scatter with the staircase overlaid.
std::string render_svg(const RunSummary& run);

/// normalized_area,accuracy rows tracing the staircase, step corners included.
std::string staircase_csv(const std::vector<FrontPoint>& front);

/// One row per run: baseline accuracy and the best points at 1% and 5% loss.
std::string summary_table(const std::vector<RunSummary>& runs);

/// Writes pareto.svg, front.csv and summary.txt into each run directory and
/// returns the combined table.
std::string write_reports(const std::vector<std::filesystem::path>& run_dirs);

}  // namespace adcprune
