#include "adcprune/adc.hpp"

#include <cmath>
#include <stdexcept>

namespace adcprune {

PrunedAdc::PrunedAdc(LevelMask mask, double vref) : mask_(mask), vref_(vref) {
  if (!std::isfinite(vref) || vref <= 0.0) {
    throw std::invalid_argument("vref must be positive and finite");
  }
}

PrunedAdc PrunedAdc::conventional(int bitwidth, double vref) {
  return PrunedAdc(LevelMask::full(bitwidth), vref);
}

double PrunedAdc::threshold(int level) const {
  return vref_ * static_cast<double>(level) / static_cast<double>(1 << bitwidth());
}

std::vector<Threshold> PrunedAdc::thresholds() const {
  std::vector<Threshold> out;
  for (int level : mask_.levels()) out.push_back({level, threshold(level)});
  return out;
}

std::vector<bool> PrunedAdc::thermometer(double vin) const {
  std::vector<bool> out;
  for (int level : mask_.levels()) out.push_back(vin > threshold(level));
  return out;
}

int PrunedAdc::conventional_code(double vin) const {
  // Largest j with vin > V_j; thresholds are increasing so bisect.
  int lo = 0;
  int hi = mask_.size();
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (vin > threshold(mid)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

int PrunedAdc::digitize(double vin) const {
  return mask_.floor_level(conventional_code(vin));
}

std::vector<double> PrunedAdc::quantize_batch(std::span<const double> samples) const {
  const double scale = 1.0 / static_cast<double>(1 << bitwidth());
  std::vector<double> out;
  out.reserve(samples.size());
  for (double s : samples) out.push_back(digitize(s) * scale);
  return out;
}

}  // namespace adcprune
