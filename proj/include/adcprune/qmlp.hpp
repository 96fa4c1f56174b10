#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace adcprune {

/// Precision of a power-of-2 MLP. Weights and biases live in the codebook
/// {0} U {+-2^e : e_min <= e <= 0} with e_min = -(2^(weight_bits-1) - 2), so a
/// multiply is a right shift and |w| <= 1. Hidden activations are clipped ReLU
/// outputs truncated to activation_bits fractional bits in [0, 1).
struct QuantConfig {
  int weight_bits = 8;
  int activation_bits = 8;
  int input_bits = 4;

  void validate() const;
  int min_exponent() const;
};

/// Nearest codebook entry in the log domain; magnitudes below 2^(e_min-1)
/// flush to zero.
double quantize_pow2(double w, const QuantConfig& cfg);

/// floor(max(a,0) * 2^bits) / 2^bits, saturated at 1 - 2^-bits.
double quantize_activation(double a, int bits);

struct TrainSpec {
  int batch_size = 32;
  int epochs = 100;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Inputs already digitized by the per-feature ADCs: raw N-bit codes,
/// row-major S x F.
struct QuantizedSet {
  int input_bits = 4;
  int features = 0;
  int num_classes = 0;
  std::vector<std::uint8_t> codes;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return {codes.data() + i * static_cast<std::size_t>(features), static_cast<std::size_t>(features)};
  }
};

/// Fully connected classifier with float shadow weights and a cached
/// power-of-2 copy used by every forward pass. Hidden layers use quantized
/// clipped ReLU; the head returns raw logits and predictions take the argmax
/// (lowest index wins ties).
class QuantMlp {
 public:
  struct Layer {
    int inputs = 0;
    int outputs = 0;
    std::vector<double> weights;  // outputs x inputs, row-major
    std::vector<double> biases;
    std::vector<double> q_weights;
    std::vector<double> q_biases;
  };

  /// `topology` = {F, hidden..., C}. Weights start uniform in
  /// [-1/sqrt(fan_in), 1/sqrt(fan_in)] from `init_seed`; biases start at 0.
  QuantMlp(std::vector<int> topology, QuantConfig cfg, std::uint64_t init_seed);

  const std::vector<int>& topology() const noexcept { return topology_; }
  const QuantConfig& config() const noexcept { return cfg_; }
  int input_size() const noexcept { return topology_.front(); }
  int output_size() const noexcept { return topology_.back(); }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  /// Overwrites shadow parameters of one layer and re-quantizes.
  void set_parameters(std::size_t layer, std::vector<double> weights, std::vector<double> biases);

  /// Quantized forward pass on fixed-point input values (code / 2^N).
  std::vector<double> forward(std::span<const double> inputs) const;
  std::vector<double> forward_codes(std::span<const std::uint8_t> codes) const;
  int predict_codes(std::span<const std::uint8_t> codes) const;

 private:
  friend struct Trainer;
  void requantize();

  std::vector<int> topology_;
  QuantConfig cfg_;
  std::vector<Layer> layers_;
};

struct TrainResult {
  bool diverged = false;
  int epochs_run = 0;
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

/// Mini-batch QAT with Adam on the shadow weights. Forward passes use the
/// quantized weights and activations; gradients cross the weight quantizer
/// unchanged (shadow weights are kept inside the codebook's [-1, 1] range)
/// and cross the activation quantizer only where 0 < z < 1. Deterministic in
/// spec.seed. A non-finite loss stops training and sets `diverged`.
TrainResult train(QuantMlp& mlp, const QuantizedSet& data, const TrainSpec& spec);

/// Mean softmax cross-entropy of the quantized model over `data`.
double mean_loss(const QuantMlp& mlp, const QuantizedSet& data);

/// Fraction of samples whose argmax matches the label. Empty sets throw.
double evaluate_accuracy(const QuantMlp& mlp, const QuantizedSet& data);

class AccumulatorOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer-only inference on raw N-bit codes: each power-of-2 weight becomes
/// an arithmetic shift of a left-aligned input register, biases are shifted
/// constants, activations are truncating shifts. Produces the same argmax as
/// the quantized float forward pass. Throws AccumulatorOverflow when any
/// register would need more than `accumulator_bits` (signed) bits.
int infer_fixed_point(const QuantMlp& mlp, std::span<const std::uint8_t> codes,
                      int accumulator_bits = 32);

/// {topology, quant:{...}, layers:[{sign:[[..]], exponent:[[..]],
/// bias_sign:[..], bias_exponent:[..]}]}. Zero weights carry sign 0.
nlohmann::json to_json(const QuantMlp& mlp);
QuantMlp mlp_from_json(const nlohmann::json& j);

}  // namespace adcprune
