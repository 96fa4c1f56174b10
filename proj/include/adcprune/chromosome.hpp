#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "adcprune/adc.hpp"
#include "adcprune/area_model.hpp"
#include "adcprune/dataset.hpp"
#include "adcprune/level_mask.hpp"
#include "adcprune/nsga2.hpp"
#include "adcprune/qmlp.hpp"
#include "json.hpp"

namespace adcprune {

/// Allowed values of each QAT hyperparameter gene.
struct GeneDomains {
  std::vector<int> weight_bits{4, 5, 6, 7, 8};
  std::vector<int> activation_bits{4, 5, 6, 7, 8};
  std::vector<int> batch_size{8, 16, 32, 64};
  std::vector<int> epochs{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};

  void validate() const;
};

/// One GA individual: a level mask per input feature plus QAT genes.
struct Chromosome {
  std::vector<LevelMask> masks;
  int weight_bits = 8;
  int activation_bits = 8;
  int batch_size = 32;
  int epochs = 100;

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

/// Raised when a chromosome falls outside its gene domains or does not fit
/// the dataset; such individuals are rejected.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FitnessSplit { Test, Validation };

struct ProblemSetup {
  int adc_bits = 4;
  double vref = 1.0;
  std::vector<int> hidden{10};
  GeneDomains domains;
  /// QAT genes of the conventional baseline individual.
  int baseline_weight_bits = 8;
  int baseline_activation_bits = 8;
  int baseline_batch_size = 32;
  int baseline_epochs = 100;
  GateCostTable costs;
  double learning_rate = 0.01;
  double train_fraction = 0.7;
  /// Share of the training split held out for fitness in Validation mode.
  double validation_fraction = 0.2;
  FitnessSplit fitness_split = FitnessSplit::Test;
  std::uint64_t run_seed = 1;
};

/// Read-only evaluation context shared by every individual of a run: the
/// dataset, its seeded stratified split and the problem setup.
class EvalContext {
 public:
  EvalContext(std::shared_ptr<const Dataset> dataset, ProblemSetup setup);

  const Dataset& dataset() const noexcept { return *dataset_; }
  const ProblemSetup& setup() const noexcept { return setup_; }
  int features() const noexcept { return static_cast<int>(dataset_->features); }
  const std::vector<std::size_t>& train_rows() const noexcept { return train_rows_; }
  const std::vector<std::size_t>& fitness_rows() const noexcept { return fitness_rows_; }
  const std::vector<std::size_t>& test_rows() const noexcept { return test_rows_; }
  /// Area of the all-ones front end, the normalisation baseline.
  double conventional_area() const;

 private:
  std::shared_ptr<const Dataset> dataset_;
  ProblemSetup setup_;
  std::vector<std::size_t> train_rows_;
  std::vector<std::size_t> fitness_rows_;
  std::vector<std::size_t> test_rows_;
};

struct DecodedIndividual {
  std::vector<PrunedAdc> adcs;
  QuantConfig quant;
  TrainSpec train;
};

DecodedIndividual decode(const Chromosome& ch, const EvalContext& ctx);

/// Runs every listed row through its feature's ADC.
QuantizedSet digitize_rows(const Dataset& ds, std::span<const std::size_t> rows,
                           std::span<const PrunedAdc> adcs);

struct EvalResult {
  double accuracy = 0.0;       // on the fitness rows
  double accuracy_miss = 1.0;  // 1 - accuracy
  double test_accuracy = 0.0;
  double frontend_area = 0.0;
  std::vector<AreaEstimate> per_input;
  bool diverged = false;
  std::optional<QuantMlp> model;
};

/// Seed of individual `index`: run_seed XOR index.
std::uint64_t individual_seed(std::uint64_t run_seed, std::uint64_t index);

/// Decodes, digitizes both splits, trains on the training rows and scores.
/// A diverged training run reports accuracy 0 (f1 = 1) with its real area.
EvalResult evaluate(const Chromosome& ch, const EvalContext& ctx, std::uint64_t individual_index,
                    bool keep_model = false);

/// Area of the chromosome's masks alone; no training involved.
double frontend_area(const Chromosome& ch, const EvalContext& ctx);

/// Uniform crossover: whole feature masks and single genes are swapped
/// between the parents independently with probability `swap_prob`.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng,
                                            double swap_prob = 0.5);

struct MutationRates {
  /// Per mask bit; unset means 1 / (2^N - 1), about one flip per feature.
  std::optional<double> mask_bit_rate;
  double gene_rate = 0.1;
};

/// Flips mask bits and re-samples genes from their domains.
Chromosome mutate(const Chromosome& ch, Rng& rng, const MutationRates& rates,
                  const GeneDomains& domains);

/// All-ones masks with the baseline QAT genes: the conventional ADC design.
Chromosome baseline_chromosome(const EvalContext& ctx);

/// Individual 0 is the baseline; the rest draw a mask density uniformly from
/// [0.2, 1.0] and set each bit with that probability, genes uniform.
std::vector<Chromosome> seed_population(int size, const EvalContext& ctx, Rng& rng);

/// {masks:[hex,...], weight_bits, activation_bits, batch_size, epochs}
nlohmann::json to_json(const Chromosome& ch);
Chromosome chromosome_from_json(const nlohmann::json& j, int adc_bits);

}  // namespace adcprune
