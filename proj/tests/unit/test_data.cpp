#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "adcprune/dataset.hpp"
#include "adcprune/fetch.hpp"
#include "doctest.h"

using namespace adcprune;
namespace fs = std::filesystem;

namespace {

Dataset labelled(const std::vector<int>& class_sizes) {
  Dataset ds;
  ds.features = 1;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    ds.class_names.push_back("c" + std::to_string(c));
    for (int i = 0; i < class_sizes[c]; ++i) {
      ds.labels.push_back(static_cast<int>(c));
      ds.values.push_back(0.0);
    }
  }
  return ds;
}

void put16(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put32(std::string& s, std::uint32_t v) {
  put16(s, v & 0xFFFF);
  put16(s, v >> 16);
}

// Bitwise reference CRC-32 (reflected 0xEDB88320).
std::uint32_t reference_crc(std::string_view data) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char byte : data) {
    crc ^= byte;
    for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

std::string raw_deflate(std::string_view data) {
  z_stream zs{};
  REQUIRE(deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) == Z_OK);
  std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  REQUIRE(deflate(&zs, Z_FINISH) == Z_STREAM_END);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

struct ZipMember {
  std::string name;
  std::string content;
  bool deflated;
};

std::string build_zip(const std::vector<ZipMember>& members) {
  std::string body;
  std::string directory;
  for (const auto& m : members) {
    const std::string payload = m.deflated ? raw_deflate(m.content) : m.content;
    const std::uint32_t crc = reference_crc(m.content);
    const auto offset = static_cast<std::uint32_t>(body.size());
    put32(body, 0x04034b50);
    put16(body, 20);
    put16(body, 0);
    put16(body, m.deflated ? 8 : 0);
    put32(body, 0);
    put32(body, crc);
    put32(body, static_cast<std::uint32_t>(payload.size()));
    put32(body, static_cast<std::uint32_t>(m.content.size()));
    put16(body, static_cast<std::uint32_t>(m.name.size()));
    put16(body, 0);
    body += m.name + payload;

    put32(directory, 0x02014b50);
    put16(directory, 20);
    put16(directory, 20);
    put16(directory, 0);
    put16(directory, m.deflated ? 8 : 0);
    put32(directory, 0);
    put32(directory, crc);
    put32(directory, static_cast<std::uint32_t>(payload.size()));
    put32(directory, static_cast<std::uint32_t>(m.content.size()));
    put16(directory, static_cast<std::uint32_t>(m.name.size()));
    put16(directory, 0);
    put16(directory, 0);
    put16(directory, 0);
    put16(directory, 0);
    put32(directory, 0);
    put32(directory, offset);
    directory += m.name;
  }
  std::string zip = body + directory;
  put32(zip, 0x06054b50);
  put16(zip, 0);
  put16(zip, 0);
  put16(zip, static_cast<std::uint32_t>(members.size()));
  put16(zip, static_cast<std::uint32_t>(members.size()));
  put32(zip, static_cast<std::uint32_t>(directory.size()));
  put32(zip, static_cast<std::uint32_t>(body.size()));
  put16(zip, 0);
  return zip;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("adcprune_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cell splitting") {
  CHECK(split_cells(" a, b ,c", ",") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_cells("1 \t 2   3", "whitespace") == std::vector<std::string>{"1", "2", "3"});
  CHECK(split_cells("x\ty", "tab") == std::vector<std::string>{"x", "y"});
  CHECK(split_cells("1;2", ";") == std::vector<std::string>{"1", "2"});
  CHECK_THROWS(split_cells("1,2", "ab"));
}

TEST_CASE("min-max normalisation and labels") {
  const CsvSchema schema;
  const LoadReport r = parse_csv("a,b,label\n0,5,yes\n10,5,no\n5,5,yes\n", schema, "t");
  const Dataset& ds = r.dataset;
  CHECK(ds.samples() == 3);
  CHECK(ds.features == 2);
  CHECK(ds.row(0)[0] == 0.0);
  CHECK(ds.row(1)[0] == 1.0);
  CHECK(ds.row(2)[0] == 0.5);
  CHECK(r.constant_features == std::vector<std::size_t>{1});
  for (std::size_t i = 0; i < 3; ++i) CHECK(ds.row(i)[1] == 0.0);
  CHECK(ds.class_names == std::vector<std::string>{"no", "yes"});
  CHECK(ds.labels == std::vector<int>{1, 0, 1});
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.feature_min[0] == 0.0);
  CHECK(ds.feature_max[0] == 10.0);

  const LoadReport numeric = parse_csv("x,y\n1,10\n2,2\n3,10\n", schema, "n");
  CHECK(numeric.dataset.class_names == std::vector<std::string>{"2", "10"});
}

TEST_CASE("malformed and missing rows are dropped") {
  const LoadReport r = parse_csv("a,b,c\n1,2,x\n3,?,y\n4,5,x\n6,7,y\n8,9,x\n", CsvSchema{}, "m");
  CHECK(r.dataset.samples() == 4);
  CHECK(r.dropped_rows == 1);
  const LoadReport short_row = parse_csv("a,b,c\n1,2,x\n3,y\n4,5,x\n", CsvSchema{}, "m");
  CHECK(short_row.dropped_rows == 1);
  CHECK_THROWS(parse_csv("a,b,c\n?,?,x\n", CsvSchema{}, "m"));
}

TEST_CASE("schema options") {
  CsvSchema s;
  s.header = false;
  s.delimiter = "whitespace";
  s.label_column = "0";
  s.drop_columns = {"1"};
  const LoadReport r = parse_csv("A 99 1 2\nB 98 3 4\n", s, "w");
  CHECK(r.dataset.features == 2);
  CHECK(r.dataset.class_names == std::vector<std::string>{"A", "B"});
  CHECK(r.dataset.row(1)[0] == 1.0);

  CsvSchema named;
  named.label_column = "kind";
  const LoadReport byname = parse_csv("kind,v\nq,1\nr,2\n", named, "n");
  CHECK(byname.dataset.labels == std::vector<int>{0, 1});
  named.label_column = "nope";
  CHECK_THROWS(parse_csv("kind,v\nq,1\n", named, "n"));
}

TEST_CASE("training size guard") {
  Dataset tiny = labelled({4, 5});
  CHECK_THROWS(validate_for_training(tiny));
  CHECK_NOTHROW(validate_for_training(labelled({5, 5})));
  CHECK_THROWS(validate_for_training(labelled({12})));
}

TEST_CASE("stratified split sizes") {
  const Dataset ds = labelled({60, 40});
  const Split s = stratified_split(ds, 0.7, 3);
  CHECK(s.train.size() == 70);
  CHECK(s.test.size() == 30);
  std::map<int, int> per_class;
  for (auto i : s.train) ++per_class[ds.labels[i]];
  CHECK(per_class[0] == 42);
  CHECK(per_class[1] == 28);

  CHECK_THROWS(stratified_split(ds, 1.0, 3));
  CHECK_THROWS(stratified_split(ds, 0.0, 3));
  const Dataset lonely = labelled({20, 1});
  try {
    stratified_split(lonely, 0.7, 1);
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("c1") != std::string::npos);
  }

  const Split again = stratified_split(ds, 0.7, 3);
  CHECK(again.train == s.train);
  CHECK(stratified_split(ds, 0.7, 4).train != s.train);
}

TEST_CASE("stratification property on random class mixes") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> sizes(2 + rng() % 5);
    for (auto& n : sizes) n = 2 + static_cast<int>(rng() % 60);
    const Dataset ds = labelled(sizes);
    const double frac = 0.1 + 0.8 * std::uniform_real_distribution<double>(0, 1)(rng);
    Split s;
    try {
      s = stratified_split(ds, frac, rng());
    } catch (const std::invalid_argument&) {
      continue;  // fraction left one side empty
    }
    REQUIRE(s.train.size() == static_cast<std::size_t>(std::llround(frac * ds.samples())));
    std::vector<int> train_count(sizes.size(), 0);
    for (auto i : s.train) ++train_count[static_cast<std::size_t>(ds.labels[i])];
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      REQUIRE(std::abs(train_count[c] - frac * sizes[c]) < 1.0 + 1e-9);
    }
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    REQUIRE(all.size() == ds.samples());
  }
}

TEST_CASE("normalisation is idempotent and bounded") {
  std::mt19937_64 rng(5);
  std::ostringstream csv;
  csv << "a,b,c,label\n";
  for (int i = 0; i < 50; ++i) {
    csv << static_cast<int>(rng() % 1000) - 500 << ',' << (rng() % 100) * 0.37 << ",1e3," << i % 3 << '\n';
  }
  const Dataset once = parse_csv(csv.str(), CsvSchema{}, "r").dataset;
  for (double v : once.values) CHECK((v >= 0.0 && v <= 1.0));
  std::ostringstream again;
  again << std::setprecision(17) << "a,b,c,label\n";
  for (std::size_t i = 0; i < once.samples(); ++i) {
    const auto row = once.row(i);
    again << row[0] << ',' << row[1] << ',' << row[2] << ',' << once.class_names[once.labels[i]] << '\n';
  }
  const Dataset twice = parse_csv(again.str(), CsvSchema{}, "r").dataset;
  REQUIRE(twice.values.size() == once.values.size());
  for (std::size_t i = 0; i < once.values.size(); ++i) CHECK(twice.values[i] == doctest::Approx(once.values[i]));
  CHECK(twice.labels == once.labels);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("manifest") {
  const Manifest m = load_manifest(fs::path(ADCPRUNE_SOURCE_DIR) / "data" / "manifest.json");
  CHECK(m.entries.size() == 6);
  REQUIRE(m.find("bc") != nullptr);
  CHECK(m.find("bc")->name == "breast_cancer_wisconsin");
  CHECK(m.find("SEEDS")->name == "seeds");
  CHECK(m.find("v3")->format == SourceFormat::Zip);
  CHECK(m.find("ctg")->format == SourceFormat::Xls);
  CHECK(m.find("missing") == nullptr);
  CHECK_THROWS(parse_manifest("{\"datasets\": 3}"));
  CHECK_THROWS(parse_manifest("not json"));
}

TEST_CASE("balance scale generation") {
  const std::string csv = generate_balance_scale_csv();
  const LoadReport r = parse_csv(csv, CsvSchema{}, "balance");
  CHECK(r.dataset.samples() == 625);
  CHECK(r.dataset.features == 4);
  std::map<std::string, int> expected;
  for (int lw = 1; lw <= 5; ++lw)
    for (int ld = 1; ld <= 5; ++ld)
      for (int rw = 1; rw <= 5; ++rw)
        for (int rd = 1; rd <= 5; ++rd) ++expected[lw * ld > rw * rd ? "L" : lw * ld < rw * rd ? "R" : "B"];
  CHECK(expected["B"] == 49);
  const auto counts = r.dataset.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    CHECK(static_cast<int>(counts[c]) == expected[r.dataset.class_names[c]]);
  }
  const Manifest m = load_manifest(fs::path(ADCPRUNE_SOURCE_DIR) / "data" / "manifest.json");
  REQUIRE(m.find("balance")->file_sha256.has_value());
  CHECK(sha256_hex(csv) == *m.find("balance")->file_sha256);
}

TEST_CASE("bundled datasets match their recorded checksums") {
  const fs::path dir = fs::path(ADCPRUNE_SOURCE_DIR) / "data";
  const Manifest m = load_manifest(dir / "manifest.json");
  for (const auto& e : m.entries) {
    if (!fs::exists(dir / e.file) || !e.file_sha256) continue;
    CAPTURE(e.name);
    CHECK(sha256_hex(slurp(dir / e.file)) == *e.file_sha256);
  }
  const LoadReport bc = load_named_dataset("BC", m, dir);
  CHECK(bc.dataset.samples() == 683);
  CHECK(bc.dataset.features == 9);
}

TEST_CASE("zip extraction") {
  const std::string text = "1 2 3 AB\n4 5 6 NO\n";
  std::string big;
  for (int i = 0; i < 200; ++i) big += text;
  const std::string zip = build_zip({{"readme.txt", "hello", false}, {"dir/column_3C.dat", big, true}});
  CHECK(extract_zip_member(zip, "readme.txt") == "hello");
  CHECK(extract_zip_member(zip, "column_3C.dat") == big);
  CHECK_THROWS(extract_zip_member(zip, "absent.dat"));
  std::string corrupt = zip;
  corrupt[30 + 10 + 1] ^= 0x20;  // inside the stored readme.txt payload
  CHECK_THROWS(extract_zip_member(corrupt, "readme.txt"));
  CHECK_THROWS(extract_zip_member("short", "x"));
  CHECK(reference_crc("123456789") == 0xCBF43926u);
}

TEST_CASE("canonicalisation") {
  DatasetEntry e;
  e.name = "toy";
  e.file = "toy.csv";
  e.raw.delimiter = "whitespace";
  e.raw.label_column = "0";
  e.raw.drop_columns = {"1"};
  e.feature_names = {"p", "q"};
  const std::string csv = canonicalize(e, "A id1 1 2\nB id2 3\nC id3 ? 4\n");
  CHECK(csv == "p,q,class\n1,2,A\n?,4,C\n");
}

TEST_CASE("fetching through an injected downloader") {
  TempDir tmp("fetch");
  DatasetEntry e;
  e.name = "toy";
  e.url = "https://example.invalid/toy.data";
  e.file = "toy.csv";
  e.feature_names = {"a", "b"};
  int calls = 0;
  const Downloader fake = [&](const std::string& url) {
    ++calls;
    CHECK(url == e.url);
    return std::string("1,2,x\n3,4,y\n");
  };
  const FetchOutcome first = fetch_dataset(e, tmp.path, fake);
  CHECK(first.written);
  CHECK(slurp(first.path) == "a,b,class\n1,2,x\n3,4,y\n");
  CHECK_FALSE(first.checksum_ok.has_value());
  const FetchOutcome kept = fetch_dataset(e, tmp.path, fake);
  CHECK_FALSE(kept.written);
  CHECK(calls == 1);

  e.checksum = sha256_hex("1,2,x\n3,4,y\n");
  const FetchOutcome verified = fetch_dataset(e, tmp.path, fake, true);
  CHECK(verified.checksum_ok == true);
  e.checksum = std::string(64, '0');
  CHECK_THROWS(fetch_dataset(e, tmp.path, fake, true));

  DatasetEntry zipped = e;
  zipped.checksum.reset();
  zipped.file = "zipped.csv";
  zipped.format = SourceFormat::Zip;
  zipped.member = "inner.dat";
  zipped.raw.delimiter = "whitespace";
  const std::string archive = build_zip({{"inner.dat", "5 6 z\n", true}});
  fetch_dataset(zipped, tmp.path, [&](const std::string&) { return archive; });
  CHECK(slurp(tmp.path / "zipped.csv") == "a,b,class\n5,6,z\n");

  DatasetEntry sheet = e;
  sheet.checksum.reset();
  sheet.file = "sheet.csv";
  sheet.url = "https://example.invalid/CTG.xls";
  sheet.format = SourceFormat::Xls;
  CHECK_THROWS_WITH_AS(fetch_dataset(sheet, tmp.path, [](const std::string&) { return std::string("xls"); }),
                       doctest::Contains("export"), std::runtime_error);
  CHECK(fs::exists(tmp.path / "CTG.xls"));
  CHECK_FALSE(fs::exists(tmp.path / "sheet.csv"));
}

TEST_CASE("named loading") {
  TempDir tmp("named");
  const Manifest m = load_manifest(fs::path(ADCPRUNE_SOURCE_DIR) / "data" / "manifest.json");
  const LoadReport balance = load_named_dataset("Ba", m, tmp.path);
  CHECK(balance.dataset.samples() == 625);
  CHECK_THROWS_WITH_AS(load_named_dataset("seeds", m, tmp.path), doctest::Contains("adcprune fetch seeds"),
                       DatasetUnavailable);
  CHECK_THROWS_AS(load_named_dataset("iris", m, tmp.path), std::invalid_argument);

  DatasetEntry gen = *m.find("balance_scale");
  const FetchOutcome out = fetch_dataset(gen, tmp.path, [](const std::string&) -> std::string {
    throw std::runtime_error("no network expected");
  });
  CHECK(out.written);
  CHECK(out.checksum_ok == true);
}
