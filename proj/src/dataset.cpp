#include "adcprune/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace adcprune {
namespace {

std::string_view trim(std::string_view s) {
  const auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && blank(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long> parse_int(std::string_view s) {
  s = trim(s);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Resolves a header name or signed position to a column index.
std::size_t resolve_column(const std::string& ref, const std::vector<std::string>& header,
                           std::size_t columns) {
  if (auto pos = parse_int(ref)) {
    const long idx = *pos < 0 ? static_cast<long>(columns) + *pos : *pos;
    if (idx < 0 || idx >= static_cast<long>(columns)) {
      throw std::invalid_argument("column " + ref + " out of range for " +
                                  std::to_string(columns) + " columns");
    }
    return static_cast<std::size_t>(idx);
  }
  const auto it = std::find(header.begin(), header.end(), ref);
  if (it == header.end()) throw std::invalid_argument("no column named '" + ref + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<std::string> split_cells(std::string_view line, std::string_view delimiter) {
  std::vector<std::string> cells;
  if (delimiter == "whitespace" || delimiter == "space") {
    std::istringstream is{std::string(line)};
    std::string cell;
    while (is >> cell) cells.push_back(cell);
    return cells;
  }
  char sep = ',';
  if (delimiter == "tab" || delimiter == "\\t") {
    sep = '\t';
  } else if (delimiter.size() == 1) {
    sep = delimiter.front();
  } else {
    throw std::invalid_argument("unsupported delimiter '" + std::string(delimiter) + "'");
  }
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(sep, start);
    cells.emplace_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return cells;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

LoadReport parse_csv(std::string_view text, const CsvSchema& schema, std::string name) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::size_t pos = 0;
  bool header_pending = schema.header;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (trim(line).empty()) continue;
    auto cells = split_cells(line, schema.delimiter);
    if (header_pending) {
      header = std::move(cells);
      header_pending = false;
    } else {
      rows.push_back(std::move(cells));
    }
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + (name.empty() ? "input" : name));

  const std::size_t columns = schema.header ? header.size() : rows.front().size();
  const std::size_t label_col = resolve_column(schema.label_column, header, columns);
  std::vector<bool> skip(columns, false);
  skip[label_col] = true;
  for (const auto& ref : schema.drop_columns) skip[resolve_column(ref, header, columns)] = true;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < columns; ++c) {
    if (!skip[c]) feature_cols.push_back(c);
  }
  if (feature_cols.empty()) throw std::invalid_argument("table has no feature columns");

  auto is_missing = [&](const std::string& cell) {
    return std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(), cell) !=
           schema.missing_tokens.end();
  };

  LoadReport report;
  std::vector<double> raw;
  std::vector<std::string> raw_labels;
  for (const auto& cells : rows) {
    if (cells.size() != columns || is_missing(cells[label_col])) {
      ++report.dropped_rows;
      continue;
    }
    std::vector<double> parsed;
    for (std::size_t c : feature_cols) {
      const auto v = is_missing(cells[c]) ? std::nullopt : parse_number(cells[c]);
      if (!v) break;
      parsed.push_back(*v);
    }
    if (parsed.size() != feature_cols.size()) {
      ++report.dropped_rows;
      continue;
    }
    raw.insert(raw.end(), parsed.begin(), parsed.end());
    raw_labels.push_back(cells[label_col]);
  }
  if (raw_labels.empty()) {
    throw std::runtime_error("no usable rows in " + (name.empty() ? "input" : name) + " (" +
                             std::to_string(report.dropped_rows) + " dropped)");
  }

  Dataset& ds = report.dataset;
  ds.name = std::move(name);
  ds.features = feature_cols.size();
  for (std::size_t c : feature_cols) {
    ds.feature_names.push_back(schema.header ? header[c] : "x" + std::to_string(c));
  }

  // Dense label ids in numeric order when possible.
  std::vector<std::string> distinct = raw_labels;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const bool numeric = std::all_of(distinct.begin(), distinct.end(),
                                   [](const std::string& s) { return parse_number(s).has_value(); });
  if (numeric) {
    std::stable_sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
      return *parse_number(a) < *parse_number(b);
    });
  }
  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < distinct.size(); ++i) ids[distinct[i]] = static_cast<int>(i);
  ds.class_names = distinct;
  for (const auto& l : raw_labels) ds.labels.push_back(ids.at(l));

  const std::size_t n = raw_labels.size();
  ds.feature_min.assign(ds.features, 0.0);
  ds.feature_max.assign(ds.features, 0.0);
  ds.values.resize(raw.size());
  for (std::size_t f = 0; f < ds.features; ++f) {
    double lo = raw[f];
    double hi = raw[f];
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, raw[i * ds.features + f]);
      hi = std::max(hi, raw[i * ds.features + f]);
    }
    ds.feature_min[f] = lo;
    ds.feature_max[f] = hi;
    const double range = hi - lo;
    if (!(range > 0.0)) report.constant_features.push_back(f);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = raw[i * ds.features + f];
      ds.values[i * ds.features + f] = range > 0.0 ? std::clamp((v - lo) / range, 0.0, 1.0) : 0.0;
    }
  }
  return report;
}

LoadReport load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read dataset file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (name.empty()) name = path.stem().string();
  return parse_csv(buf.str(), schema, std::move(name));
}

void validate_for_training(const Dataset& ds) {
  if (ds.samples() < 10) {
    throw std::invalid_argument("dataset " + ds.name + " has " + std::to_string(ds.samples()) +
                                " samples; at least 10 are required");
  }
  if (ds.num_classes() < 2) throw std::invalid_argument("dataset " + ds.name + " has a single class");
}

Split stratified_split(const Dataset& ds, double train_frac, std::uint64_t seed) {
  std::vector<std::size_t> all(ds.samples());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return stratified_split(ds, all, train_frac, seed);
}

Split stratified_split(const Dataset& ds, std::span<const std::size_t> pool, double train_frac,
                       std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac <= 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1]");
  }
  const std::size_t classes = ds.class_names.size();
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i : pool) members[static_cast<std::size_t>(ds.labels.at(i))].push_back(i);
  for (std::size_t c = 0; c < classes; ++c) {
    if (members[c].size() == 1) {
      throw std::invalid_argument("class '" + ds.class_names[c] +
                                  "' has a single sample; stratification needs at least 2");
    }
  }

  const auto total = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(pool.size())));
  std::vector<std::size_t> quota(classes);
  std::vector<double> remainder(classes);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double exact = train_frac * static_cast<double>(members[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> by_remainder(classes);
  std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total && k < classes; ++k) {
    const std::size_t c = by_remainder[k];
    if (remainder[c] > 0.0 && quota[c] < members[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  Split split;
  split.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& m = members[c];
    std::shuffle(m.begin(), m.end(), rng);
    split.train.insert(split.train.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    split.test.insert(split.test.end(), m.begin() + static_cast<std::ptrdiff_t>(quota[c]), m.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  if (split.test.empty()) throw std::invalid_argument("split leaves the test set empty");
  if (split.train.empty()) throw std::invalid_argument("split leaves the training set empty");
  return split;
}

}  // namespace adcprune
