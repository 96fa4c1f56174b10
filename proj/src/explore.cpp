#include "adcprune/explore.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

namespace adcprune {
namespace {

using nlohmann::json;

constexpr std::uint64_t kPopulationStream = 0x6A09E667F3BCC909ULL;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::string join_masks(const Chromosome& ch) {
  std::string out;
  for (std::size_t f = 0; f < ch.masks.size(); ++f) {
    if (f > 0) out += ';';
    out += ch.masks[f].to_hex();
  }
  return out;
}

json area_json(const std::vector<AreaEstimate>& per_input) {
  json arr = json::array();
  for (std::size_t f = 0; f < per_input.size(); ++f) {
    arr.push_back({{"feature", f},
                   {"comparators", per_input[f].comparators},
                   {"or2_gates", per_input[f].or2_gates},
                   {"total", per_input[f].total}});
  }
  return arr;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf.data(), ptr);
}

ExploreResult run_exploration(const RunConfig& config, std::shared_ptr<const Dataset> dataset,
                              std::ostream* progress) {
  const EvalContext ctx(std::move(dataset), config.setup);
  const double conventional = ctx.conventional_area();

  std::mutex cache_lock;
  std::map<std::uint64_t, EvalResult> cache;
  Problem<Chromosome> problem;
  problem.evaluate = [&](const Chromosome& g, std::uint64_t index) {
    EvalResult r = evaluate(g, ctx, index);
    Objectives obj{r.accuracy_miss, r.frontend_area};
    std::lock_guard lock(cache_lock);
    cache.emplace(index, std::move(r));
    return obj;
  };
  problem.crossover = [](const Chromosome& a, const Chromosome& b, Rng& rng) { return crossover(a, b, rng); };
  problem.mutate = [&](const Chromosome& g, Rng& rng) {
    return mutate(g, rng, config.mutation, config.setup.domains);
  };

  EvolveOptions options;
  options.hv_reference = {1.1, 1.1 * conventional};
  if (progress != nullptr) {
    options.on_generation = [&](const GenerationStats& s) {
      *progress << "generation " << s.generation << ": best accuracy miss " << s.best_f1 << ", best area "
                << s.best_f2 << ", front size " << s.front0_size << ", hypervolume "
                << s.hypervolume / conventional << std::endl;
    };
  }

  Rng init_rng(config.seed ^ kPopulationStream);
  auto initial = seed_population(config.ga.population, ctx, init_rng);

  ExploreResult out;
  out.conventional_area = conventional;
  out.evolution = evolve(problem, std::move(initial), config.ga, options);
  out.baseline = cache.at(0);

  for (const auto& ind : out.evolution.archive) {
    const EvalResult& r = cache.at(ind.eval_index);
    ArchivePoint p;
    p.id = out.pareto.size();
    p.eval_index = ind.eval_index;
    p.genome = ind.genome;
    p.accuracy_miss = r.accuracy_miss;
    p.accuracy = r.accuracy;
    p.test_accuracy = r.test_accuracy;
    p.area = r.frontend_area;
    p.normalized_area = conventional > 0.0 ? r.frontend_area / conventional : 0.0;
    p.per_input = r.per_input;
    out.pareto.push_back(std::move(p));
  }
  return out;
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& configured) {
  if (configured.is_absolute()) return configured;
  if (const char* root = std::getenv("ADCPRUNE_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
    return std::filesystem::path(root) / configured;
  }
  return configured;
}

void write_artifact(const RunConfig& config, const Dataset& dataset, const ExploreResult& result,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const double conventional = result.conventional_area;

  write_text(dir / "config.json", to_json(config).dump(2) + "\n");

  std::ostringstream gens;
  gens << "generation,best_f1,best_f2,front0_size,hypervolume\n";
  for (const auto& s : result.evolution.log) {
    gens << s.generation << ',' << format_double(s.best_f1) << ',' << format_double(s.best_f2) << ','
         << s.front0_size << ',' << format_double(conventional > 0 ? s.hypervolume / conventional : 0.0) << '\n';
  }
  write_text(dir / "generations.csv", gens.str());

  std::ostringstream csv;
  csv << "id,f1_acc_miss,accuracy,f2_area_units,area_normalized_to_baseline,masks_hex,weight_bits,"
         "activation_bits,batch_size,epochs\n";
  json points = json::array();
  for (const auto& p : result.pareto) {
    csv << p.id << ',' << format_double(p.accuracy_miss) << ',' << format_double(p.accuracy) << ','
        << format_double(p.area) << ',' << format_double(p.normalized_area) << ',' << join_masks(p.genome) << ','
        << p.genome.weight_bits << ',' << p.genome.activation_bits << ',' << p.genome.batch_size << ','
        << p.genome.epochs << '\n';
    points.push_back({{"id", p.id},
                      {"eval_index", p.eval_index},
                      {"chromosome", to_json(p.genome)},
                      {"f1_acc_miss", p.accuracy_miss},
                      {"accuracy", p.accuracy},
                      {"test_accuracy", p.test_accuracy},
                      {"f2_area_units", p.area},
                      {"area_normalized_to_baseline", p.normalized_area},
                      {"per_input_area", area_json(p.per_input)}});
  }
  write_text(dir / "pareto.csv", csv.str());

  const EvalResult& b = result.baseline;
  json pareto = {{"dataset", dataset.name},
                 {"features", dataset.features},
                 {"classes", dataset.num_classes()},
                 {"adc_bits", config.setup.adc_bits},
                 {"conventional_area", conventional},
                 {"baseline",
                  {{"accuracy", b.accuracy},
                   {"test_accuracy", b.test_accuracy},
                   {"f2_area_units", b.frontend_area},
                   {"diverged", b.diverged}}},
                 {"points", points}};
  write_text(dir / "pareto.json", pareto.dump(2) + "\n");

  json pop = json::array();
  for (const auto& ind : result.evolution.population) {
    pop.push_back({{"eval_index", ind.eval_index},
                   {"chromosome", to_json(ind.genome)},
                   {"objectives", ind.objectives},
                   {"rank", ind.rank},
                   {"crowding", std::isfinite(ind.crowding) ? json(ind.crowding) : json("inf")},
                   {"failed", ind.failed}});
  }
  write_text(dir / "population.json", pop.dump(2) + "\n");

  json env = {{"tool", "adcprune"},
              {"version", ADCPRUNE_VERSION},
              {"seed", config.seed},
              {"compiler", __VERSION__},
              {"evaluations", result.evolution.population.empty()
                                  ? 0
                                  : config.ga.population * (config.ga.generations + 1)}};
  write_text(dir / "environment.json", env.dump(2) + "\n");
}

PointReport evaluate_point(const RunConfig& config, std::shared_ptr<const Dataset> dataset,
                           const Chromosome& chromosome) {
  const EvalContext ctx(std::move(dataset), config.setup);
  PointReport report;
  report.result = evaluate(chromosome, ctx, 0);
  report.conventional_area = ctx.conventional_area();
  report.normalized_area =
      report.conventional_area > 0 ? report.result.frontend_area / report.conventional_area : 0.0;
  return report;
}

void print_point_report(std::ostream& os, const Dataset& dataset, const Chromosome& chromosome,
                        const PointReport& report) {
  const EvalResult& r = report.result;
  os << "dataset: " << dataset.name << " (" << dataset.samples() << " samples, " << dataset.features
     << " features, " << dataset.num_classes() << " classes)\n";
  os << "genes: weight_bits=" << chromosome.weight_bits << " activation_bits=" << chromosome.activation_bits
     << " batch_size=" << chromosome.batch_size << " epochs=" << chromosome.epochs << "\n";
  os << "accuracy: " << format_double(r.accuracy) << (r.diverged ? " (training diverged)" : "") << "\n";
  os << "test accuracy: " << format_double(r.test_accuracy) << "\n";
  os << "input  mask      comparators  or2  total\n";
  for (std::size_t f = 0; f < r.per_input.size(); ++f) {
    const auto& a = r.per_input[f];
    os << std::left << std::setw(7) << f << std::setw(10) << chromosome.masks[f].to_hex() << std::right
       << std::setw(11) << a.comparators << std::setw(5) << a.or2_gates << std::setw(7) << format_double(a.total)
       << "\n";
  }
  os << "frontend area: " << format_double(r.frontend_area) << "\n";
  os << "conventional area: " << format_double(report.conventional_area) << "\n";
  os << "normalized area: " << format_double(report.normalized_area) << "\n";
}

Chromosome chromosome_from_document(const json& j, int adc_bits) {
  try {
    if (j.contains("chromosome")) return chromosome_from_json(j.at("chromosome"), adc_bits);
    return chromosome_from_json(j, adc_bits);
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed chromosome JSON: ") + e.what());
  }
}

}  // namespace adcprune
