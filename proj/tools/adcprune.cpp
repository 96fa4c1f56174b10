#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adcprune/explore.hpp"
#include "adcprune/fetch.hpp"
#include "adcprune/netlist.hpp"
#include "adcprune/oracle.hpp"
#include "adcprune/report.hpp"
#include "adcprune/run_config.hpp"

namespace fs = std::filesystem;
using namespace adcprune;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CsvFlags {
  std::string dataset;
  std::string label_col;
  std::string delimiter;
  bool no_header = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--dataset", dataset, "Manifest dataset name or CSV path");
    cmd->add_option("--label-col", label_col, "Label column: header name or index (negative from the end)");
    cmd->add_option("--delimiter", delimiter, "Cell delimiter: one character, 'tab' or 'whitespace'");
    cmd->add_flag("--no-header", no_header, "The CSV has no header row");
  }

  bool schema_given() const { return !label_col.empty() || !delimiter.empty() || no_header; }

  // Overrides the dataset reference of a config with command-line flags.
  void apply(DatasetRef& ref) const {
    if (!dataset.empty()) {
      const fs::path p(dataset);
      if (fs::exists(p) || p.has_parent_path() || p.extension() == ".csv") {
        ref.name.clear();
        ref.path = p;
      } else {
        ref.name = dataset;
        ref.path.clear();
      }
    }
    if (!schema_given()) return;
    if (!ref.name.empty()) throw ConfigError("CSV flags apply only to a dataset given by path");
    if (!label_col.empty()) ref.schema.label_column = label_col;
    if (!delimiter.empty()) ref.schema.delimiter = delimiter;
    if (no_header) ref.schema.header = false;
  }
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::shared_ptr<const Dataset> load_and_report(const DatasetRef& ref) {
  LoadReport report;
  auto ds = load_dataset(ref, &report);
  if (report.dropped_rows > 0) {
    std::cerr << "warning: dropped " << report.dropped_rows << " rows with missing or malformed cells\n";
  }
  for (std::size_t f : report.constant_features) {
    std::cerr << "warning: feature " << ds->feature_names[f] << " is constant and normalizes to 0\n";
  }
  return ds;
}

int run_explore(const std::string& config_path, const std::string& out, int workers, bool quiet,
                const std::string& fitness_split, const CsvFlags& csv) {
  RunConfig config = load_run_config(config_path);
  csv.apply(config.dataset);
  if (!fitness_split.empty()) {
    config.setup.fitness_split = fitness_split == "validation" ? FitnessSplit::Validation : FitnessSplit::Test;
  }
  if (!out.empty()) config.output_dir = out;
  if (workers >= 0) config.ga.workers = workers;
  auto ds = load_and_report(config.dataset);
  const fs::path dir = resolve_output_dir(config.output_dir);
  const ExploreResult result = run_exploration(config, ds, quiet ? nullptr : &std::cerr);
  write_artifact(config, *ds, result, dir);
  std::cout << "wrote " << result.pareto.size() << " Pareto points to " << dir.string() << "\n";
  std::cout << "baseline accuracy " << format_double(result.baseline.accuracy) << ", conventional area "
            << format_double(result.conventional_area) << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string config;
  std::string chromosome;
  std::string masks;
  int weight_bits = 8;
  int activation_bits = 8;
  int batch_size = 32;
  int epochs = 100;
};

int run_evaluate(const EvaluateArgs& args, const CsvFlags& csv) {
  RunConfig config;
  if (!args.config.empty()) {
    config = load_run_config(args.config);
  } else if (csv.dataset.empty()) {
    throw ConfigError("evaluate needs --config or --dataset");
  }
  csv.apply(config.dataset);
  if (config.dataset.name.empty() && config.dataset.path.empty()) throw ConfigError("no dataset given");
  auto ds = load_and_report(config.dataset);

  Chromosome ch;
  const int bits = config.setup.adc_bits;
  if (!args.chromosome.empty()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text(args.chromosome));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("chromosome file is not valid JSON: ") + e.what());
    }
    ch = chromosome_from_document(doc, bits);
  } else if (!args.masks.empty()) {
    std::string masks = args.masks;
    std::replace(masks.begin(), masks.end(), ';', ',');
    std::stringstream ss(masks);
    std::string hex;
    while (std::getline(ss, hex, ',')) {
      if (hex == "full" || hex == "all") {
        ch.masks.push_back(LevelMask::full(bits));
      } else {
        ch.masks.push_back(LevelMask::parse_hex(bits, hex));
      }
    }
    if (ch.masks.size() == 1 && ds->features > 1) ch.masks.assign(ds->features, ch.masks.front());
    ch.weight_bits = args.weight_bits;
    ch.activation_bits = args.activation_bits;
    ch.batch_size = args.batch_size;
    ch.epochs = args.epochs;
  } else {
    throw ConfigError("evaluate needs --chromosome or --masks");
  }
  const PointReport report = evaluate_point(config, ds, ch);
  print_point_report(std::cout, *ds, ch, report);
  return kExitOk;
}

int run_netlist(int bits, const std::string& hex, const std::string& format, const std::string& out,
                const std::string& module, bool raw) {
  const LevelMask mask = LevelMask::parse_hex(bits, hex);
  const Netlist net = raw ? build_encoder(bits, mask) : compile_encoder(bits, mask);
  const GateCounts c = count_gates(net);
  const AreaEstimate conventional = estimate_area(LevelMask::full(bits));
  std::cout << "bits=" << bits << " mask=" << mask.to_hex() << " comparators=" << mask.popcount()
            << " OR2=" << c.or2 << " AND2=" << c.and2 << " INV=" << c.inv;
  if (raw) std::cout << " WIRE=" << c.wire << " CONST0=" << c.const0;
  std::cout << " (conventional: comparators=" << conventional.comparators << " OR2=" << conventional.or2_gates
            << ")\n";

  std::string body;
  if (format == "json") {
    body = to_json(net).dump(2) + "\n";
  } else {
    if (raw) throw ConfigError("--raw netlists can only be emitted as JSON");
    body = emit_hdl(net, module.empty() ? "flash_adc_encoder_" + mask.to_hex() : module);
  }
  if (out.empty() || out == "-") {
    std::cout << body;
  } else {
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + out);
    file << body;
    std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

int run_fetch(const std::vector<std::string>& names, const std::string& dir_arg, bool force, bool list) {
  const Manifest manifest = default_manifest();
  const fs::path dir = dir_arg.empty() ? data_dir() : fs::path(dir_arg);
  if (list) {
    for (const auto& e : manifest.entries) {
      std::string aliases;
      for (const auto& a : e.aliases) aliases += (aliases.empty() ? "" : ",") + a;
      std::cout << e.name << " [" << aliases << "] " << e.feature_names.size() << " features, "
                << (fs::exists(dir / e.file)                  ? "present"
                    : e.format == SourceFormat::Generated ? "generated on demand"
                                                          : "missing")
                << "\n";
    }
    return kExitOk;
  }
  std::vector<const DatasetEntry*> targets;
  if (names.empty()) {
    for (const auto& e : manifest.entries) targets.push_back(&e);
  } else {
    for (const auto& n : names) {
      const DatasetEntry* e = manifest.find(n);
      if (e == nullptr) throw ConfigError("unknown dataset '" + n + "'");
      targets.push_back(e);
    }
  }
  int status = kExitOk;
  for (const DatasetEntry* e : targets) {
    try {
      const FetchOutcome o = fetch_dataset(*e, dir, http_download, force);
      std::cout << e->name << ": " << (o.written ? "wrote " : "kept ") << o.path.string() << " sha256 " << o.sha256;
      if (o.checksum_ok) std::cout << (*o.checksum_ok ? " (matches manifest)" : " (differs from manifest)");
      std::cout << "\n";
    } catch (const std::exception& ex) {
      std::cerr << e->name << ": " << ex.what() << "\n";
      status = kExitRuntime;
    }
  }
  return status;
}

int run_oracle(int function_bits, int area_bits) {
  const FunctionOracleReport f = run_function_oracle(function_bits);
  std::cout << "function oracle N=" << f.bitwidth << ": " << f.masks << " masks, " << f.cases << " inputs, "
            << f.mismatches << " mismatches, " << format_double(f.seconds) << " s\n";
  if (f.mismatches > 0) std::cout << "  first mismatch: " << f.first_mismatch << "\n";
  const AreaOracleReport a = run_area_oracle(area_bits);
  std::cout << "area oracle N=" << a.bitwidth << ": " << a.masks << " masks, " << a.comparator_mismatches
            << " comparator mismatches, " << a.or2_mismatches << " OR2 mismatches, pearson "
            << format_double(a.pearson) << ", " << format_double(a.seconds) << " s\n";
  if (!a.first_mismatch.empty()) std::cout << "  first mismatch: " << a.first_mismatch << "\n";
  const bool ok = f.mismatches == 0 && a.comparator_mismatches == 0 && a.or2_mismatches == 0;
  return ok ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flash ADC level pruning and QAT MLP co-design explorer"};
  app.set_version_flag("--version", std::string("adcprune ") + ADCPRUNE_VERSION);
  app.require_subcommand(1);

  CsvFlags explore_csv;
  std::string config_path;
  std::string out_dir;
  int workers = -1;
  bool quiet = false;
  std::string fitness_split;
  auto* explore = app.add_subcommand("explore", "Run the NSGA-II search and write a run artifact");
  explore->add_option("config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);
  explore->add_option("--out", out_dir, "Override the output directory");
  explore->add_option("--workers", workers, "Evaluation threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  explore->add_flag("--quiet", quiet, "No per-generation progress");
  explore->add_option("--fitness-split", fitness_split, "Score fitness on the test split or a validation carve-out")
      ->check(CLI::IsMember({"test", "validation"}));
  explore_csv.add_to(explore);

  CsvFlags evaluate_csv;
  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Train and score one chromosome");
  evaluate->add_option("--config", eval_args.config, "Run config JSON")->check(CLI::ExistingFile);
  evaluate->add_option("--chromosome", eval_args.chromosome, "Chromosome or pareto.json point")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--masks", eval_args.masks, "Comma-separated hex masks, or one mask for every input");
  evaluate->add_option("--weight-bits", eval_args.weight_bits, "Weight bits when using --masks");
  evaluate->add_option("--activation-bits", eval_args.activation_bits, "Activation bits when using --masks");
  evaluate->add_option("--batch-size", eval_args.batch_size, "Batch size when using --masks");
  evaluate->add_option("--epochs", eval_args.epochs, "Epochs when using --masks");
  evaluate_csv.add_to(evaluate);

  int bits = 4;
  std::string mask_hex;
  std::string format = "hdl";
  std::string netlist_out;
  std::string module;
  bool raw = false;
  auto* netlist = app.add_subcommand("netlist", "Emit the encoder netlist of one pruned ADC");
  netlist->add_option("--bits", bits, "ADC resolution")->required();
  netlist->add_option("--mask", mask_hex, "Surviving levels as hex, level 1 in the LSB")->required();
  netlist->add_option("--format", format, "hdl or json")->check(CLI::IsMember({"hdl", "json"}));
  netlist->add_option("--out", netlist_out, "Output file (default stdout)");
  netlist->add_option("--module", module, "HDL module name");
  netlist->add_flag("--raw", raw, "Skip simplification (JSON only)");

  std::vector<std::string> run_dirs;
  auto* report = app.add_subcommand("report", "Plot and summarise one or more run artifacts");
  report->add_option("runs", run_dirs, "Run directories")->required();

  std::vector<std::string> fetch_names;
  std::string fetch_dir;
  bool force = false;
  bool list = false;
  auto* fetch = app.add_subcommand("fetch", "Download datasets listed in the manifest");
  fetch->add_option("names", fetch_names, "Dataset names or aliases (default: all)");
  fetch->add_option("--dir", fetch_dir, "Target directory (default: data directory)");
  fetch->add_flag("--force", force, "Replace existing files");
  fetch->add_flag("--list", list, "List manifest entries and exit");

  int function_bits = 3;
  int area_bits = 4;
  auto* oracle = app.add_subcommand("oracle", "Run the exhaustive netlist function and area oracles");
  oracle->add_option("--function-bits", function_bits, "Resolution of the function oracle")
      ->check(CLI::Range(kMinBitwidth, kMaxBitwidth));
  oracle->add_option("--area-bits", area_bits, "Resolution of the area oracle")->check(CLI::Range(kMinBitwidth, 5));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*explore) return run_explore(config_path, out_dir, workers, quiet, fitness_split, explore_csv);
    if (*evaluate) return run_evaluate(eval_args, evaluate_csv);
    if (*netlist) return run_netlist(bits, mask_hex, format, netlist_out, module, raw);
    if (*report) {
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      std::cout << write_reports(dirs);
      return kExitOk;
    }
    if (*fetch) return run_fetch(fetch_names, fetch_dir, force, list);
    if (*oracle) return run_oracle(function_bits, area_bits);
  } catch (const DatasetUnavailable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
