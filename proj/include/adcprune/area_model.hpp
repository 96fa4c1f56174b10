#pragma once

#include <span>
#include <vector>

#include "adcprune/adc.hpp"
#include "adcprune/level_mask.hpp"

namespace adcprune {

/// Area units charged per comparator and per two-input OR. The defaults make
/// the proxy a plain gate count. The resistor ladder is not charged: pruning
/// keeps it uniform, so it is constant across every candidate.
struct GateCostTable {
  double comparator_cost = 1.0;
  double or2_cost = 1.0;

  void validate() const;
};

struct AreaEstimate {
  int comparators = 0;
  int or2_gates = 0;
  double total = 0.0;
};

/// For each encoder output bit i (index i), the surviving levels whose binary
/// code has bit i set. A full mask gives 2^(N-1) levels per bit.
std::vector<std::vector<int>> encoder_or_sets(const LevelMask& mask);
std::vector<std::vector<int>> encoder_or_sets(int bitwidth, const LevelMask& mask);

/// Two-input ORs needed to reduce `fanin` lines: fan-in 1 is a wire and fan-in
/// 0 a constant, so both cost nothing.
int or_tree_gate_count(int fanin);

AreaEstimate estimate_area(const LevelMask& mask, const GateCostTable& costs = {});
AreaEstimate estimate_area(const PrunedAdc& adc, const GateCostTable& costs = {});

/// Sum of the per-input ADC areas of a sensor front end.
double total_frontend_area(std::span<const PrunedAdc> adcs, const GateCostTable& costs = {});

/// Area of `features` conventional N-bit ADCs; the normalisation baseline.
double conventional_frontend_area(int features, int bitwidth, const GateCostTable& costs = {});

}  // namespace adcprune
