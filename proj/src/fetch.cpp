#include "adcprune/fetch.hpp"

#include <curl/curl.h>
#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include "json.hpp"

namespace adcprune {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

SourceFormat parse_format(const std::string& s) {
  if (s == "text") return SourceFormat::Text;
  if (s == "zip") return SourceFormat::Zip;
  if (s == "xls") return SourceFormat::Xls;
  if (s == "generated") return SourceFormat::Generated;
  throw std::invalid_argument("unknown dataset format '" + s + "'");
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::uint32_t le16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) throw std::runtime_error("truncated zip archive");
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8;
}

std::uint32_t le32(std::string_view b, std::size_t at) { return le16(b, at) | le16(b, at + 2) << 16; }

std::size_t write_callback(char* data, std::size_t size, std::size_t count, void* user) {
  static_cast<std::string*>(user)->append(data, size * count);
  return size * count;
}

}  // namespace

const DatasetEntry* Manifest::find(std::string_view name) const {
  const std::string key = lower(name);
  for (const auto& e : entries) {
    if (lower(e.name) == key) return &e;
    for (const auto& a : e.aliases) {
      if (lower(a) == key) return &e;
    }
  }
  return nullptr;
}

Manifest parse_manifest(std::string_view json_text) {
  const auto root = nlohmann::json::parse(json_text);
  Manifest m;
  for (const auto& j : root.at("datasets")) {
    DatasetEntry e;
    e.name = j.at("name").get<std::string>();
    e.aliases = j.value("aliases", std::vector<std::string>{});
    e.url = j.value("url", std::string{});
    e.checksum = optional_string(j, "checksum");
    e.file_sha256 = optional_string(j, "file_sha256");
    e.file = j.at("file").get<std::string>();
    e.format = parse_format(j.value("format", std::string("text")));
    e.member = j.value("member", std::string{});
    if (j.contains("raw")) {
      const auto& r = j.at("raw");
      e.raw.delimiter = r.value("delimiter", std::string(","));
      e.raw.header = r.value("header", false);
      e.raw.label_column = r.value("label_column", std::string("-1"));
      e.raw.drop_columns = r.value("drop_columns", std::vector<std::string>{});
    }
    e.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    e.label_column = j.value("label_column", std::string("class"));
    if (e.format == SourceFormat::Zip && e.member.empty()) {
      throw std::invalid_argument("zip dataset " + e.name + " needs a member name");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_file(path)); }

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("ADCPRUNE_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return ADCPRUNE_DEFAULT_DATA_DIR;
}

Manifest default_manifest() {
  const auto local = data_dir() / "manifest.json";
  if (std::filesystem::exists(local)) return load_manifest(local);
  return load_manifest(std::filesystem::path(ADCPRUNE_DEFAULT_DATA_DIR) / "manifest.json");
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string extract_zip_member(std::string_view archive, std::string_view member) {
  if (archive.size() < 22) throw std::runtime_error("not a zip archive");
  std::size_t eocd = std::string_view::npos;
  for (std::size_t at = archive.size() - 22;; --at) {
    if (le32(archive, at) == 0x06054b50) {
      eocd = at;
      break;
    }
    if (at == 0 || archive.size() - at > 22 + 0xFFFF) break;
  }
  if (eocd == std::string_view::npos) throw std::runtime_error("zip end-of-directory record not found");

  const std::uint32_t entries = le16(archive, eocd + 10);
  std::size_t at = le32(archive, eocd + 16);
  for (std::uint32_t i = 0; i < entries; ++i) {
    if (le32(archive, at) != 0x02014b50) throw std::runtime_error("corrupt zip central directory");
    const std::uint32_t method = le16(archive, at + 10);
    const std::uint32_t crc = le32(archive, at + 16);
    const std::uint32_t packed = le32(archive, at + 20);
    const std::uint32_t size = le32(archive, at + 24);
    const std::uint32_t name_len = le16(archive, at + 28);
    const std::uint32_t extra_len = le16(archive, at + 30);
    const std::uint32_t comment_len = le16(archive, at + 32);
    const std::uint32_t local = le32(archive, at + 42);
    if (at + 46 + name_len > archive.size()) throw std::runtime_error("truncated zip archive");
    const std::string_view name = archive.substr(at + 46, name_len);
    at += 46 + name_len + extra_len + comment_len;
    const bool match = name == member || (name.size() > member.size() && name.ends_with(member) &&
                                          name[name.size() - member.size() - 1] == '/');
    if (!match) continue;

    if (le32(archive, local) != 0x04034b50) throw std::runtime_error("corrupt zip local header");
    const std::size_t data = local + 30 + le16(archive, local + 26) + le16(archive, local + 28);
    if (data + packed > archive.size()) throw std::runtime_error("truncated zip member");
    const std::string_view payload = archive.substr(data, packed);
    std::string out;
    if (method == 0) {
      out.assign(payload);
    } else if (method == 8) {
      out.resize(size);
      z_stream zs{};
      if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw std::runtime_error("inflateInit failed");
      zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(payload.data()));
      zs.avail_in = static_cast<uInt>(payload.size());
      zs.next_out = reinterpret_cast<Bytef*>(out.data());
      zs.avail_out = static_cast<uInt>(out.size());
      const int rc = inflate(&zs, Z_FINISH);
      inflateEnd(&zs);
      if (rc != Z_STREAM_END || zs.total_out != size) throw std::runtime_error("zip member failed to inflate");
    } else {
      throw std::runtime_error("unsupported zip compression method " + std::to_string(method));
    }
    const auto actual = crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size()));
    if (actual != crc) throw std::runtime_error("zip member CRC mismatch");
    return out;
  }
  throw std::runtime_error("zip archive has no member '" + std::string(member) + "'");
}

std::string http_download(const std::string& url) {
  static std::once_flag init;
  std::call_once(init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), curl_easy_cleanup);
  if (!curl) throw std::runtime_error("curl_easy_init failed");
  std::string body;
  std::array<char, CURL_ERROR_SIZE> error{};
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 20L);
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, 300L);
  curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, error.data());
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, write_callback);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) {
    throw std::runtime_error("download of " + url + " failed: " +
                             (error[0] != '\0' ? std::string(error.data()) : curl_easy_strerror(rc)));
  }
  return body;
}

std::string canonicalize(const DatasetEntry& entry, std::string_view raw_text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(raw_text)};
  std::string line;
  bool skip_header = entry.raw.header;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (skip_header) {
      skip_header = false;
      continue;
    }
    rows.push_back(split_cells(line, entry.raw.delimiter));
  }
  const std::size_t columns = entry.feature_names.size() + 1 + entry.raw.drop_columns.size();
  auto index = [&](const std::string& ref) {
    const long v = std::stol(ref);
    const long idx = v < 0 ? static_cast<long>(columns) + v : v;
    if (idx < 0 || idx >= static_cast<long>(columns)) {
      throw std::invalid_argument(entry.name + ": raw column " + ref + " out of range");
    }
    return static_cast<std::size_t>(idx);
  };
  const std::size_t label = index(entry.raw.label_column);
  std::vector<bool> skip(columns, false);
  skip[label] = true;
  for (const auto& d : entry.raw.drop_columns) skip[index(d)] = true;

  std::string out;
  for (const auto& name : entry.feature_names) out += name + ",";
  out += entry.label_column + "\n";
  for (const auto& cells : rows) {
    if (cells.size() != columns) continue;
    for (std::size_t c = 0; c < columns; ++c) {
      if (!skip[c]) out += cells[c] + ",";
    }
    out += cells[label] + "\n";
  }
  return out;
}

std::string generate_balance_scale_csv() {
  std::string out = "left_weight,left_distance,right_weight,right_distance,class\n";
  for (int lw = 1; lw <= 5; ++lw) {
    for (int ld = 1; ld <= 5; ++ld) {
      for (int rw = 1; rw <= 5; ++rw) {
        for (int rd = 1; rd <= 5; ++rd) {
          const int left = lw * ld;
          const int right = rw * rd;
          const char* side = left > right ? "L" : left < right ? "R" : "B";
          out += std::to_string(lw) + "," + std::to_string(ld) + "," + std::to_string(rw) + "," +
                 std::to_string(rd) + "," + side + "\n";
        }
      }
    }
  }
  return out;
}

FetchOutcome fetch_dataset(const DatasetEntry& entry, const std::filesystem::path& dir,
                           const Downloader& download, bool force) {
  FetchOutcome outcome;
  outcome.path = dir / entry.file;
  if (!force && std::filesystem::exists(outcome.path)) {
    outcome.sha256 = sha256_hex(read_file(outcome.path));
    if (entry.file_sha256) outcome.checksum_ok = outcome.sha256 == *entry.file_sha256;
    return outcome;
  }

  std::string csv;
  if (entry.format == SourceFormat::Generated) {
    csv = generate_balance_scale_csv();
    outcome.sha256 = sha256_hex(csv);
    if (entry.file_sha256) outcome.checksum_ok = outcome.sha256 == *entry.file_sha256;
  } else {
    if (entry.url.empty()) throw std::runtime_error(entry.name + " has no download URL");
    const std::string bytes = download(entry.url);
    outcome.sha256 = sha256_hex(bytes);
    if (entry.checksum) {
      outcome.checksum_ok = outcome.sha256 == *entry.checksum;
      if (!*outcome.checksum_ok) {
        throw std::runtime_error(entry.name + ": checksum mismatch (expected " + *entry.checksum + ", got " +
                                 outcome.sha256 + ")");
      }
    }
    if (entry.format == SourceFormat::Xls) {
      const auto raw_path = dir / std::filesystem::path(entry.url).filename();
      write_file(raw_path, bytes);
      std::string columns;
      for (const auto& f : entry.feature_names) columns += f + ",";
      throw std::runtime_error(entry.name + ": spreadsheet saved to " + raw_path.string() +
                               "; export it to " + outcome.path.string() + " with header " + columns +
                               entry.label_column);
    }
    const std::string text = entry.format == SourceFormat::Zip ? extract_zip_member(bytes, entry.member) : bytes;
    csv = canonicalize(entry, text);
  }
  write_file(outcome.path, csv);
  outcome.written = true;
  return outcome;
}

LoadReport load_named_dataset(std::string_view name, const Manifest& manifest,
                              const std::filesystem::path& dir) {
  const DatasetEntry* entry = manifest.find(name);
  if (entry == nullptr) throw std::invalid_argument("unknown dataset '" + std::string(name) + "'");
  CsvSchema schema;
  schema.label_column = entry->label_column;
  const auto path = dir / entry->file;
  if (std::filesystem::exists(path)) return load_csv(path, schema, entry->name);
  if (entry->format == SourceFormat::Generated) {
    return parse_csv(generate_balance_scale_csv(), schema, entry->name);
  }
  throw DatasetUnavailable("dataset " + entry->name + " is not present in " + dir.string() +
                           "; run `adcprune fetch " + entry->name + "`");
}

LoadReport load_named_dataset(std::string_view name) {
  return load_named_dataset(name, default_manifest(), data_dir());
}

}  // namespace adcprune
