#include "adcprune/oracle.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "adcprune/adc.hpp"
#include "adcprune/netlist.hpp"

namespace adcprune {
namespace {

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

FunctionOracleReport run_function_oracle(int bitwidth) {
  const auto start = std::chrono::steady_clock::now();
  FunctionOracleReport report;
  report.bitwidth = bitwidth;
  const int levels = level_count(bitwidth);
  const std::uint64_t count = std::uint64_t{1} << levels;
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    const LevelMask mask = LevelMask::from_bits(bitwidth, bits);
    const PrunedAdc adc(mask);
    const Netlist net = compile_encoder(bitwidth, mask);
    const auto surviving = adc.thresholds();
    ++report.masks;
    // Prefix p of ones: input just above the p-th surviving threshold.
    for (std::size_t p = 0; p <= surviving.size(); ++p) {
      const double lo = p == 0 ? 0.0 : surviving[p - 1].voltage;
      const double hi = p < surviving.size() ? surviving[p].voltage : adc.vref();
      const double vin = 0.5 * (lo + hi);
      std::vector<bool> therm(surviving.size(), false);
      std::fill(therm.begin(), therm.begin() + static_cast<std::ptrdiff_t>(p), true);
      const int got = simulate(net, therm);
      const int want = adc.digitize(vin);
      ++report.cases;
      if (got != want || adc.thermometer(vin) != therm) {
        if (report.mismatches++ == 0) {
          report.first_mismatch = "mask " + mask.to_hex() + " prefix " + std::to_string(p) + ": netlist " +
                                  std::to_string(got) + ", adc " + std::to_string(want);
        }
      }
    }
  }
  report.seconds = elapsed(start);
  return report;
}

AreaOracleReport run_area_oracle(int bitwidth, const GateCostTable& costs) {
  const auto start = std::chrono::steady_clock::now();
  AreaOracleReport report;
  report.bitwidth = bitwidth;
  const std::uint64_t count = std::uint64_t{1} << level_count(bitwidth);
  std::vector<double> proxy;
  std::vector<double> gates;
  proxy.reserve(count);
  gates.reserve(count);
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    const LevelMask mask = LevelMask::from_bits(bitwidth, bits);
    const AreaEstimate est = estimate_area(mask, costs);
    const GateCounts net = count_gates(compile_encoder(bitwidth, mask));
    ++report.masks;
    const bool cmp_ok = est.comparators == mask.popcount();
    const bool or_ok = est.or2_gates == net.or2;
    if (!cmp_ok) ++report.comparator_mismatches;
    if (!or_ok) ++report.or2_mismatches;
    if ((!cmp_ok || !or_ok) && report.first_mismatch.empty()) {
      report.first_mismatch = "mask " + mask.to_hex() + ": proxy OR2 " + std::to_string(est.or2_gates) +
                              ", netlist OR2 " + std::to_string(net.or2);
    }
    proxy.push_back(est.total);
    gates.push_back(static_cast<double>(mask.popcount() + net.logic_gates()));
  }
  report.pearson = pearson_correlation(proxy, gates);
  report.seconds = elapsed(start);
  return report;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("correlation inputs differ in length");
  if (x.size() < 2) throw std::invalid_argument("correlation needs at least two samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw std::invalid_argument("correlation of a constant series");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace adcprune
