#include "adcprune/chromosome.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace adcprune {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

bool contains(const std::vector<int>& domain, int value) {
  return std::find(domain.begin(), domain.end(), value) != domain.end();
}

int sample(const std::vector<int>& domain, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, domain.size() - 1);
  return domain[pick(rng)];
}

void check_domain(const std::vector<int>& domain, const char* gene, int value) {
  if (!contains(domain, value)) {
    throw DomainError(std::string(gene) + " = " + std::to_string(value) + " is outside its domain");
  }
}

}  // namespace

void GeneDomains::validate() const {
  auto check = [](const std::vector<int>& d, const char* gene, int lo, int hi) {
    if (d.empty()) throw std::invalid_argument(std::string(gene) + " domain is empty");
    for (int v : d) {
      if (v < lo || v > hi) {
        throw std::invalid_argument(std::string(gene) + " domain value " + std::to_string(v) +
                                    " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
    }
  };
  check(weight_bits, "weight_bits", 2, 8);
  check(activation_bits, "activation_bits", 2, 8);
  check(batch_size, "batch_size", 1, 1 << 20);
  check(epochs, "epochs", 1, 100000);
}

EvalContext::EvalContext(std::shared_ptr<const Dataset> dataset, ProblemSetup setup)
    : dataset_(std::move(dataset)), setup_(std::move(setup)) {
  if (!dataset_) throw std::invalid_argument("evaluation context needs a dataset");
  level_count(setup_.adc_bits);
  if (setup_.adc_bits > 8) throw std::invalid_argument("ADC codes must fit in 8 bits");
  for (int h : setup_.hidden) {
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be positive");
  }
  setup_.domains.validate();
  setup_.costs.validate();
  check_domain(setup_.domains.weight_bits, "baseline weight_bits", setup_.baseline_weight_bits);
  check_domain(setup_.domains.activation_bits, "baseline activation_bits", setup_.baseline_activation_bits);
  check_domain(setup_.domains.batch_size, "baseline batch_size", setup_.baseline_batch_size);
  check_domain(setup_.domains.epochs, "baseline epochs", setup_.baseline_epochs);
  if (!(setup_.validation_fraction > 0.0 && setup_.validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  }
  validate_for_training(*dataset_);

  const Split outer = stratified_split(*dataset_, setup_.train_fraction, setup_.run_seed);
  test_rows_ = outer.test;
  if (setup_.fitness_split == FitnessSplit::Validation) {
    const Split inner = stratified_split(*dataset_, outer.train, 1.0 - setup_.validation_fraction,
                                         splitmix64(setup_.run_seed));
    train_rows_ = inner.train;
    fitness_rows_ = inner.test;
  } else {
    train_rows_ = outer.train;
    fitness_rows_ = outer.test;
  }
}

double EvalContext::conventional_area() const {
  return conventional_frontend_area(features(), setup_.adc_bits, setup_.costs);
}

DecodedIndividual decode(const Chromosome& ch, const EvalContext& ctx) {
  const ProblemSetup& s = ctx.setup();
  if (static_cast<int>(ch.masks.size()) != ctx.features()) {
    throw DomainError("chromosome has " + std::to_string(ch.masks.size()) + " masks but the dataset has " +
                      std::to_string(ctx.features()) + " features");
  }
  DecodedIndividual d;
  for (const LevelMask& m : ch.masks) {
    if (m.bitwidth() != s.adc_bits) {
      throw DomainError("mask " + m.to_hex() + " is not a " + std::to_string(s.adc_bits) + "-bit mask");
    }
    d.adcs.emplace_back(m, s.vref);
  }
  check_domain(s.domains.weight_bits, "weight_bits", ch.weight_bits);
  check_domain(s.domains.activation_bits, "activation_bits", ch.activation_bits);
  check_domain(s.domains.batch_size, "batch_size", ch.batch_size);
  check_domain(s.domains.epochs, "epochs", ch.epochs);
  d.quant = {ch.weight_bits, ch.activation_bits, s.adc_bits};
  d.train.batch_size = ch.batch_size;
  d.train.epochs = ch.epochs;
  d.train.learning_rate = s.learning_rate;
  return d;
}

QuantizedSet digitize_rows(const Dataset& ds, std::span<const std::size_t> rows,
                           std::span<const PrunedAdc> adcs) {
  if (adcs.size() != ds.features) throw std::invalid_argument("need one ADC per feature");
  QuantizedSet out;
  out.input_bits = adcs.empty() ? 4 : adcs.front().bitwidth();
  out.features = static_cast<int>(ds.features);
  out.num_classes = ds.num_classes();
  out.codes.reserve(rows.size() * ds.features);
  for (std::size_t r : rows) {
    const auto x = ds.row(r);
    for (std::size_t f = 0; f < ds.features; ++f) {
      out.codes.push_back(static_cast<std::uint8_t>(adcs[f].digitize(x[f])));
    }
    out.labels.push_back(ds.labels[r]);
  }
  return out;
}

std::uint64_t individual_seed(std::uint64_t run_seed, std::uint64_t index) { return run_seed ^ index; }

double frontend_area(const Chromosome& ch, const EvalContext& ctx) {
  const auto adcs = decode(ch, ctx).adcs;
  return total_frontend_area(adcs, ctx.setup().costs);
}

EvalResult evaluate(const Chromosome& ch, const EvalContext& ctx, std::uint64_t individual_index,
                    bool keep_model) {
  DecodedIndividual d = decode(ch, ctx);
  const ProblemSetup& s = ctx.setup();
  const Dataset& ds = ctx.dataset();

  EvalResult r;
  for (const auto& adc : d.adcs) {
    r.per_input.push_back(estimate_area(adc, s.costs));
    r.frontend_area += r.per_input.back().total;
  }

  const std::uint64_t seed = individual_seed(s.run_seed, individual_index);
  d.train.seed = splitmix64(seed);
  std::vector<int> topology{ctx.features()};
  topology.insert(topology.end(), s.hidden.begin(), s.hidden.end());
  topology.push_back(ds.num_classes());
  QuantMlp mlp(topology, d.quant, seed);

  const QuantizedSet train_set = digitize_rows(ds, ctx.train_rows(), d.adcs);
  const TrainResult tr = train(mlp, train_set, d.train);
  if (tr.diverged) {
    r.diverged = true;
    r.accuracy = 0.0;
    r.accuracy_miss = 1.0;
    r.test_accuracy = 0.0;
  } else {
    r.accuracy = evaluate_accuracy(mlp, digitize_rows(ds, ctx.fitness_rows(), d.adcs));
    r.accuracy_miss = 1.0 - r.accuracy;
    r.test_accuracy = s.fitness_split == FitnessSplit::Test
                          ? r.accuracy
                          : evaluate_accuracy(mlp, digitize_rows(ds, ctx.test_rows(), d.adcs));
  }
  if (keep_model) r.model = std::move(mlp);
  return r;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng,
                                            double swap_prob) {
  if (a.masks.size() != b.masks.size()) throw std::invalid_argument("parents differ in shape");
  std::bernoulli_distribution swap(swap_prob);
  Chromosome x = a;
  Chromosome y = b;
  for (std::size_t f = 0; f < x.masks.size(); ++f) {
    if (swap(rng)) std::swap(x.masks[f], y.masks[f]);
  }
  if (swap(rng)) std::swap(x.weight_bits, y.weight_bits);
  if (swap(rng)) std::swap(x.activation_bits, y.activation_bits);
  if (swap(rng)) std::swap(x.batch_size, y.batch_size);
  if (swap(rng)) std::swap(x.epochs, y.epochs);
  return {std::move(x), std::move(y)};
}

Chromosome mutate(const Chromosome& ch, Rng& rng, const MutationRates& rates,
                  const GeneDomains& domains) {
  Chromosome out = ch;
  for (LevelMask& m : out.masks) {
    const double rate = rates.mask_bit_rate.value_or(1.0 / m.size());
    std::bernoulli_distribution flip(rate);
    for (int level = 1; level <= m.size(); ++level) {
      if (flip(rng)) m.flip(level);
    }
  }
  std::bernoulli_distribution resample(rates.gene_rate);
  if (resample(rng)) out.weight_bits = sample(domains.weight_bits, rng);
  if (resample(rng)) out.activation_bits = sample(domains.activation_bits, rng);
  if (resample(rng)) out.batch_size = sample(domains.batch_size, rng);
  if (resample(rng)) out.epochs = sample(domains.epochs, rng);
  return out;
}

Chromosome baseline_chromosome(const EvalContext& ctx) {
  const ProblemSetup& s = ctx.setup();
  Chromosome ch;
  ch.masks.assign(static_cast<std::size_t>(ctx.features()), LevelMask::full(s.adc_bits));
  ch.weight_bits = s.baseline_weight_bits;
  ch.activation_bits = s.baseline_activation_bits;
  ch.batch_size = s.baseline_batch_size;
  ch.epochs = s.baseline_epochs;
  return ch;
}

std::vector<Chromosome> seed_population(int size, const EvalContext& ctx, Rng& rng) {
  if (size < 4) throw std::invalid_argument("population size must be >= 4");
  const ProblemSetup& s = ctx.setup();
  std::vector<Chromosome> pop;
  pop.push_back(baseline_chromosome(ctx));
  std::uniform_real_distribution<double> density(0.2, 1.0);
  while (static_cast<int>(pop.size()) < size) {
    Chromosome ch;
    std::bernoulli_distribution keep(density(rng));
    for (int f = 0; f < ctx.features(); ++f) {
      LevelMask m = LevelMask::empty(s.adc_bits);
      for (int level = 1; level <= m.size(); ++level) m.set(level, keep(rng));
      ch.masks.push_back(m);
    }
    ch.weight_bits = sample(s.domains.weight_bits, rng);
    ch.activation_bits = sample(s.domains.activation_bits, rng);
    ch.batch_size = sample(s.domains.batch_size, rng);
    ch.epochs = sample(s.domains.epochs, rng);
    pop.push_back(std::move(ch));
  }
  return pop;
}

nlohmann::json to_json(const Chromosome& ch) {
  nlohmann::json masks = nlohmann::json::array();
  for (const auto& m : ch.masks) masks.push_back(m.to_hex());
  return {{"masks", masks},
          {"weight_bits", ch.weight_bits},
          {"activation_bits", ch.activation_bits},
          {"batch_size", ch.batch_size},
          {"epochs", ch.epochs}};
}

Chromosome chromosome_from_json(const nlohmann::json& j, int adc_bits) {
  Chromosome ch;
  for (const auto& hex : j.at("masks")) ch.masks.push_back(LevelMask::parse_hex(adc_bits, hex.get<std::string>()));
  ch.weight_bits = j.at("weight_bits").get<int>();
  ch.activation_bits = j.at("activation_bits").get<int>();
  ch.batch_size = j.at("batch_size").get<int>();
  ch.epochs = j.at("epochs").get<int>();
  return ch;
}

}  // namespace adcprune
