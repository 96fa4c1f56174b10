#include "adcprune/area_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adcprune {

void GateCostTable::validate() const {
  if (!std::isfinite(comparator_cost) || !std::isfinite(or2_cost) ||
      comparator_cost < 0.0 || or2_cost < 0.0) {
    throw std::invalid_argument("gate costs must be finite and non-negative");
  }
}

std::vector<std::vector<int>> encoder_or_sets(const LevelMask& mask) {
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(mask.bitwidth()));
  for (int level : mask.levels()) {
    for (int bit = 0; bit < mask.bitwidth(); ++bit) {
      if ((level >> bit) & 1) sets[static_cast<std::size_t>(bit)].push_back(level);
    }
  }
  return sets;
}

std::vector<std::vector<int>> encoder_or_sets(int bitwidth, const LevelMask& mask) {
  if (mask.bitwidth() != bitwidth) {
    throw std::invalid_argument("mask length does not match a " +
                                std::to_string(bitwidth) + "-bit ADC");
  }
  return encoder_or_sets(mask);
}

int or_tree_gate_count(int fanin) {
  if (fanin < 0) throw std::invalid_argument("fan-in must be non-negative");
  return std::max(fanin - 1, 0);
}

AreaEstimate estimate_area(const LevelMask& mask, const GateCostTable& costs) {
  costs.validate();
  AreaEstimate est;
  est.comparators = mask.popcount();
  for (const auto& set : encoder_or_sets(mask)) {
    est.or2_gates += or_tree_gate_count(static_cast<int>(set.size()));
  }
  est.total = est.comparators * costs.comparator_cost + est.or2_gates * costs.or2_cost;
  return est;
}

AreaEstimate estimate_area(const PrunedAdc& adc, const GateCostTable& costs) {
  return estimate_area(adc.mask(), costs);
}

double total_frontend_area(std::span<const PrunedAdc> adcs, const GateCostTable& costs) {
  double total = 0.0;
  for (const auto& adc : adcs) total += estimate_area(adc, costs).total;
  return total;
}

double conventional_frontend_area(int features, int bitwidth, const GateCostTable& costs) {
  if (features < 0) throw std::invalid_argument("feature count must be non-negative");
  return features * estimate_area(LevelMask::full(bitwidth), costs).total;
}

}  // namespace adcprune
