#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adcprune/dataset.hpp"

namespace adcprune {

/// Layout of a file as published upstream, before conversion to the
/// canonical CSV (named feature columns followed by a "class" column).
struct RawLayout {
  std::string delimiter = ",";
  bool header = false;
  std::string label_column = "-1";
  std::vector<std::string> drop_columns;
};

enum class SourceFormat { Text, Zip, Xls, Generated };

struct DatasetEntry {
  std::string name;
  std::vector<std::string> aliases;
  std::string url;
  std::optional<std::string> checksum;     // sha256 of the downloaded bytes
  std::optional<std::string> file_sha256;  // sha256 of the canonical CSV
  std::string file;                        // canonical CSV name in the data dir
  SourceFormat format = SourceFormat::Text;
  std::string member;  // file inside a zip archive
  RawLayout raw;
  std::vector<std::string> feature_names;
  std::string label_column = "class";
};

struct Manifest {
  std::vector<DatasetEntry> entries;

  /// Case-insensitive lookup by name or alias.
  const DatasetEntry* find(std::string_view name) const;
};

Manifest parse_manifest(std::string_view json_text);
Manifest load_manifest(const std::filesystem::path& path);

/// $ADCPRUNE_DATA_DIR if set, otherwise the directory chosen at build time.
std::filesystem::path data_dir();
/// data_dir()/manifest.json, falling back to the build-time copy.
Manifest default_manifest();

/// Raised when a named dataset has no local copy and cannot be generated.
class DatasetUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(std::string_view bytes);

/// Returns the uncompressed bytes of `member` (stored or deflated).
std::string extract_zip_member(std::string_view archive, std::string_view member);

using Downloader = std::function<std::string(const std::string& url)>;
/// libcurl GET with redirects; throws std::runtime_error on any failure.
std::string http_download(const std::string& url);

/// Reorders raw upstream text into the canonical CSV. Rows with the wrong
/// column count are skipped; missing-value tokens are kept for the loader.
std::string canonicalize(const DatasetEntry& entry, std::string_view raw_text);

/// All 625 (left weight, left distance, right weight, right distance)
/// combinations of 1..5, labelled by which side the torque tips.
std::string generate_balance_scale_csv();

struct FetchOutcome {
  std::filesystem::path path;
  std::string sha256;
  bool written = false;              // false when an existing copy was kept
  std::optional<bool> checksum_ok;   // set when the manifest records one
};

/// Materialises the canonical CSV of `entry` in `dir`. Existing files are
/// kept unless `force`. Spreadsheet sources are saved raw and rejected with
/// conversion instructions.
FetchOutcome fetch_dataset(const DatasetEntry& entry, const std::filesystem::path& dir,
                           const Downloader& download = http_download, bool force = false);

/// Loads a manifest dataset from `dir` (generating it when possible).
/// Throws DatasetUnavailable when no local copy exists.
LoadReport load_named_dataset(std::string_view name, const Manifest& manifest,
                              const std::filesystem::path& dir);
LoadReport load_named_dataset(std::string_view name);

}  // namespace adcprune
