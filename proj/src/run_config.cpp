#include "adcprune/run_config.hpp"

#include <fstream>
#include <set>

#include "adcprune/fetch.hpp"

namespace adcprune {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects whatever was not consumed.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = raw(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key) + " has the wrong type");
    }
  }

  int integer(const std::string& key, int fallback, int lo, int hi) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(path(key) + " must be an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi) {
      throw ConfigError(path(key) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(x);
  }

  double number(const std::string& key, double fallback, double lo, double hi) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key) + " must be a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi)) {
      throw ConfigError(path(key) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return x;
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array() || v.empty()) throw ConfigError(path(key) + " must be a non-empty integer array");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw ConfigError(path(key) + " must hold integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  Fields object(const std::string& key) { return Fields(raw(key), path(key)); }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + path(key) + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

const char* split_name(FitnessSplit s) { return s == FitnessSplit::Test ? "test" : "validation"; }

}  // namespace

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  Fields top(j, "");

  if (!top.has("dataset")) throw ConfigError("config needs a 'dataset' entry");
  {
    Fields d = top.object("dataset");
    d.get("name", c.dataset.name);
    std::string path;
    d.get("path", path);
    if (c.dataset.name.empty() == path.empty()) {
      throw ConfigError("dataset needs exactly one of 'name' or 'path'");
    }
    if (!path.empty()) {
      c.dataset.path = path;
      if (c.dataset.path.is_relative() && !base_dir.empty()) c.dataset.path = base_dir / c.dataset.path;
    }
    d.get("label_column", c.dataset.schema.label_column);
    d.get("delimiter", c.dataset.schema.delimiter);
    d.get("header", c.dataset.schema.header);
    d.get("drop_columns", c.dataset.schema.drop_columns);
    d.get("missing_tokens", c.dataset.schema.missing_tokens);
    d.finish();
  }

  ProblemSetup& s = c.setup;
  s.adc_bits = top.integer("adc_bits", s.adc_bits, kMinBitwidth, kMaxBitwidth);
  s.vref = top.number("vref", s.vref, 1e-12, 1e12);
  if (top.has("topology")) {
    Fields t = top.object("topology");
    s.hidden = t.int_list("hidden", s.hidden);
    t.finish();
  }
  if (top.has("ga")) {
    Fields g = top.object("ga");
    c.ga.population = g.integer("population", c.ga.population, 4, 100000);
    c.ga.generations = g.integer("generations", c.ga.generations, 0, 1000000);
    c.ga.crossover_prob = g.number("crossover_prob", c.ga.crossover_prob, 0.0, 1.0);
    c.ga.mutation_prob = g.number("mutation_prob", c.ga.mutation_prob, 0.0, 1.0);
    c.ga.workers = g.integer("workers", c.ga.workers, 0, 4096);
    g.finish();
  }
  if (top.has("genes")) {
    Fields g = top.object("genes");
    s.domains.weight_bits = g.int_list("weight_bits", s.domains.weight_bits);
    s.domains.activation_bits = g.int_list("activation_bits", s.domains.activation_bits);
    s.domains.batch_size = g.int_list("batch_size", s.domains.batch_size);
    s.domains.epochs = g.int_list("epochs", s.domains.epochs);
    g.finish();
  }
  if (top.has("baseline")) {
    Fields b = top.object("baseline");
    s.baseline_weight_bits = b.integer("weight_bits", s.baseline_weight_bits, 2, 8);
    s.baseline_activation_bits = b.integer("activation_bits", s.baseline_activation_bits, 2, 8);
    s.baseline_batch_size = b.integer("batch_size", s.baseline_batch_size, 1, 1 << 20);
    s.baseline_epochs = b.integer("epochs", s.baseline_epochs, 1, 100000);
    b.finish();
  }
  if (top.has("mutation")) {
    Fields m = top.object("mutation");
    if (m.has("mask_bit_rate") && !m.raw("mask_bit_rate").is_null()) {
      c.mutation.mask_bit_rate = m.number("mask_bit_rate", 0.0, 0.0, 1.0);
    }
    c.mutation.gene_rate = m.number("gene_rate", c.mutation.gene_rate, 0.0, 1.0);
    m.finish();
  }
  if (top.has("costs")) {
    Fields k = top.object("costs");
    s.costs.comparator_cost = k.number("comparator", s.costs.comparator_cost, 0.0, 1e12);
    s.costs.or2_cost = k.number("or2", s.costs.or2_cost, 0.0, 1e12);
    k.finish();
  }
  s.learning_rate = top.number("learning_rate", s.learning_rate, 1e-12, 10.0);
  s.train_fraction = top.number("train_fraction", s.train_fraction, 1e-9, 1.0 - 1e-9);
  s.validation_fraction = top.number("validation_fraction", s.validation_fraction, 1e-9, 1.0 - 1e-9);
  if (top.has("fitness_split")) {
    std::string mode;
    top.get("fitness_split", mode);
    if (mode == "test") {
      s.fitness_split = FitnessSplit::Test;
    } else if (mode == "validation") {
      s.fitness_split = FitnessSplit::Validation;
    } else {
      throw ConfigError("fitness_split must be \"test\" or \"validation\"");
    }
  }
  std::string out;
  top.get("output_dir", out);
  if (!out.empty()) c.output_dir = out;
  if (top.has("seed")) {
    const json& v = top.raw("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError("seed must be a non-negative integer");
    }
    c.seed = v.get<std::uint64_t>();
  }
  top.finish();

  c.ga.seed = c.seed;
  s.run_seed = c.seed;
  try {
    c.ga.validate();
    s.domains.validate();
    s.costs.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (int h : s.hidden) {
    if (h < 1 || h > 4096) throw ConfigError("topology.hidden sizes must lie in [1, 4096]");
  }
  auto in_domain = [](const std::vector<int>& d, int v) { return std::find(d.begin(), d.end(), v) != d.end(); };
  if (!in_domain(s.domains.weight_bits, s.baseline_weight_bits) ||
      !in_domain(s.domains.activation_bits, s.baseline_activation_bits) ||
      !in_domain(s.domains.batch_size, s.baseline_batch_size) ||
      !in_domain(s.domains.epochs, s.baseline_epochs)) {
    throw ConfigError("baseline genes must lie inside the gene domains");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

json to_json(const RunConfig& c) {
  const ProblemSetup& s = c.setup;
  json dataset;
  if (!c.dataset.name.empty()) {
    dataset["name"] = c.dataset.name;
  } else {
    dataset["path"] = c.dataset.path.string();
    dataset["label_column"] = c.dataset.schema.label_column;
    dataset["delimiter"] = c.dataset.schema.delimiter;
    dataset["header"] = c.dataset.schema.header;
    dataset["drop_columns"] = c.dataset.schema.drop_columns;
    dataset["missing_tokens"] = c.dataset.schema.missing_tokens;
  }
  return {
      {"dataset", dataset},
      {"adc_bits", s.adc_bits},
      {"vref", s.vref},
      {"topology", {{"hidden", s.hidden}}},
      {"ga",
       {{"population", c.ga.population},
        {"generations", c.ga.generations},
        {"crossover_prob", c.ga.crossover_prob},
        {"mutation_prob", c.ga.mutation_prob},
        {"workers", c.ga.workers}}},
      {"genes",
       {{"weight_bits", s.domains.weight_bits},
        {"activation_bits", s.domains.activation_bits},
        {"batch_size", s.domains.batch_size},
        {"epochs", s.domains.epochs}}},
      {"baseline",
       {{"weight_bits", s.baseline_weight_bits},
        {"activation_bits", s.baseline_activation_bits},
        {"batch_size", s.baseline_batch_size},
        {"epochs", s.baseline_epochs}}},
      {"mutation",
       {{"mask_bit_rate", c.mutation.mask_bit_rate ? json(*c.mutation.mask_bit_rate) : json(nullptr)},
        {"gene_rate", c.mutation.gene_rate}}},
      {"costs", {{"comparator", s.costs.comparator_cost}, {"or2", s.costs.or2_cost}}},
      {"learning_rate", s.learning_rate},
      {"train_fraction", s.train_fraction},
      {"validation_fraction", s.validation_fraction},
      {"fitness_split", split_name(s.fitness_split)},
      {"output_dir", c.output_dir.string()},
      {"seed", c.seed},
  };
}

std::shared_ptr<const Dataset> load_dataset(const DatasetRef& ref, LoadReport* report) {
  LoadReport loaded = ref.name.empty() ? load_csv(ref.path, ref.schema) : load_named_dataset(ref.name);
  validate_for_training(loaded.dataset);
  auto ds = std::make_shared<const Dataset>(loaded.dataset);
  if (report != nullptr) *report = std::move(loaded);
  return ds;
}

}  // namespace adcprune
