#pragma once

#include <span>
#include <vector>

#include "adcprune/level_mask.hpp"

namespace adcprune {

struct Threshold {
  int level = 0;
  double voltage = 0.0;

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

/// Behavioral model of a bespoke flash ADC whose comparator levels may have
/// been pruned. The resistor ladder stays uniform: level j sits at
/// j * vref / 2^N whether or not its neighbours survive.
///
/// Comparators fire on strict inequality (vin > V_j), so an input exactly on a
/// threshold resolves to the lower code. Inputs outside [0, vref] saturate.
/// Instances are immutable; every member is safe to call concurrently.
class PrunedAdc {
 public:
  explicit PrunedAdc(LevelMask mask, double vref = 1.0);

  static PrunedAdc conventional(int bitwidth, double vref = 1.0);

  int bitwidth() const noexcept { return mask_.bitwidth(); }
  double vref() const noexcept { return vref_; }
  const LevelMask& mask() const noexcept { return mask_; }
  int comparator_count() const noexcept { return mask_.popcount(); }

  /// Ladder voltage of level j, surviving or not.
  double threshold(int level) const;
  /// Surviving levels only, ascending.
  std::vector<Threshold> thresholds() const;

  /// One bit per surviving comparator, ascending level order.
  std::vector<bool> thermometer(double vin) const;

  /// Original N-bit code of the highest surviving level below vin, or 0.
  int digitize(double vin) const;

  /// digitize(s) / 2^N for every sample: the value an N-bit fixed-point MLP
  /// input holds.
  std::vector<double> quantize_batch(std::span<const double> samples) const;

 private:
  // Code a conventional (unpruned) ADC with the same ladder would emit.
  int conventional_code(double vin) const;

  LevelMask mask_;
  double vref_ = 1.0;
};

}  // namespace adcprune
