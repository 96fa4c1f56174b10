#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "adcprune/area_model.hpp"

namespace adcprune {

/// Netlist simulation against the behavioural ADC for every mask of one
/// bitwidth and every valid thermometer input.
struct FunctionOracleReport {
  int bitwidth = 0;
  std::size_t masks = 0;
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
  double seconds = 0.0;
};

FunctionOracleReport run_function_oracle(int bitwidth);

/// Proxy counts against the simplified netlist for every mask, plus the
/// Pearson correlation of proxy area with the full logic gate count.
struct AreaOracleReport {
  int bitwidth = 0;
  std::size_t masks = 0;
  std::size_t comparator_mismatches = 0;
  std::size_t or2_mismatches = 0;
  std::string first_mismatch;
  double pearson = 0.0;
  double seconds = 0.0;
};

AreaOracleReport run_area_oracle(int bitwidth, const GateCostTable& costs = {});

/// Sample Pearson correlation; throws on length mismatch, fewer than two
/// samples or zero variance.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace adcprune
