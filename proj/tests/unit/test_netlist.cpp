#include <stdexcept>
#include <map>
#include <random>
#include <regex>
#include <sstream>

#include "adcprune/adc.hpp"
#include "adcprune/area_model.hpp"
#include "adcprune/netlist.hpp"
#include "doctest.h"

using namespace adcprune;

namespace {

std::vector<bool> prefix(std::size_t length, std::size_t ones) {
  std::vector<bool> v(length, false);
  for (std::size_t i = 0; i < ones; ++i) v[i] = true;
  return v;
}

// Tiny interpreter for the emitted Verilog subset, so emitted text is checked
// against behaviour rather than against the emitter's own data structures.
int run_hdl(const std::string& hdl, const LevelMask& mask, std::size_t ones) {
  std::map<std::string, bool> nets;
  const auto levels = mask.levels();
  for (std::size_t k = 0; k < levels.size(); ++k) nets["t" + std::to_string(levels[k])] = k < ones;
  nets["1'b0"] = false;
  const std::regex gate(R"(^\s*(and|or|not)\s+\w+\s*\(([^)]*)\);)");
  const std::regex assign(R"(^\s*assign\s+code\[(\d+)\]\s*=\s*([\w']+);)");
  int code = 0;
  std::istringstream in(hdl);
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_search(line, m, gate)) {
      std::vector<std::string> ports;
      std::stringstream ps(m[2].str());
      std::string p;
      while (std::getline(ps, p, ',')) {
        p.erase(0, p.find_first_not_of(' '));
        p.erase(p.find_last_not_of(' ') + 1);
        ports.push_back(p);
      }
      const std::string kind = m[1];
      if (kind == "not") {
        nets[ports[0]] = !nets.at(ports[1]);
      } else if (kind == "and") {
        nets[ports[0]] = nets.at(ports[1]) && nets.at(ports[2]);
      } else {
        nets[ports[0]] = nets.at(ports[1]) || nets.at(ports[2]);
      }
    } else if (std::regex_search(line, m, assign)) {
      if (nets.at(m[2].str())) code |= 1 << std::stoi(m[1].str());
    }
  }
  return code;
}

}  // namespace

TEST_CASE("pruned 3-bit encoder") {
  const LevelMask mask = LevelMask::parse_hex(3, "4F");
  const Netlist net = compile_encoder(3, mask);
  CHECK(net.input_count() == 5);
  CHECK(simulate(net, {true, true, true, true, false}) == 4);
  CHECK(simulate(net, prefix(5, 0)) == 0);
  CHECK(simulate(net, prefix(5, 5)) == 7);

  // one-hot(4) reads T4 and the inverse of T7, the next surviving level.
  const Netlist raw = build_encoder(3, mask);
  bool found = false;
  for (const Gate& g : raw.gates()) {
    if (raw.net_name(g.output) == "oh4") {
      REQUIRE(g.kind == GateKind::And2);
      CHECK(raw.net_name(g.inputs[0]) == "t4");
      CHECK(raw.net_name(g.inputs[1]) == "tn7");
      found = true;
    }
  }
  CHECK(found);

  const GateCounts c = count_gates(net);
  CHECK(c.or2 == 5);
  CHECK(c.and2 == 4);
  CHECK(c.inv == 4);
}

TEST_CASE("gate counts of full encoders") {
  const GateCounts n3 = count_gates(compile_encoder(3, LevelMask::full(3)));
  CHECK(n3 == GateCounts{6, 9, 6, 0, 0});
  const GateCounts n4 = count_gates(compile_encoder(4, LevelMask::full(4)));
  CHECK(n4 == GateCounts{14, 28, 14, 0, 0});
  CHECK(count_gates(compile_encoder(3, LevelMask::empty(3))) == GateCounts{});

  const Netlist one = compile_encoder(1, LevelMask::full(1));
  CHECK(one.gates().empty());
  CHECK(one.outputs() == std::vector<NetId>{0});
}

TEST_CASE("raw encoder keeps wires and constants until simplification") {
  const Netlist raw = build_encoder(3, LevelMask::from_levels(3, std::vector<int>{2}));
  const GateCounts rc = count_gates(raw);
  CHECK(rc.const0 == 2);  // bits 0 and 2 have no member
  CHECK(rc.wire >= 1);
  const Netlist simple = simplify(raw);
  const GateCounts sc = count_gates(simple);
  CHECK(sc.const0 == 0);
  CHECK(sc.wire == 0);
  CHECK(simple.outputs()[0] == kConstZero);
  CHECK(simple.outputs()[2] == kConstZero);
  CHECK(simulate(simple, {true}) == 2);
  CHECK(simulate(simple, {false}) == 0);
}

TEST_CASE("simulate rejects malformed thermometer vectors") {
  const Netlist net = compile_encoder(3, LevelMask::full(3));
  CHECK_THROWS_AS(simulate(net, {true, false, true, false, false, false, false}), std::invalid_argument);
  CHECK_THROWS_AS(simulate(net, prefix(6, 2)), std::invalid_argument);
  CHECK_THROWS_AS(compile_encoder(4, LevelMask::full(3)), std::invalid_argument);
}

TEST_CASE("exhaustive equivalence with the behavioural ADC up to 4 bits") {
  for (int n = 1; n <= 4; ++n) {
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << level_count(n)); ++bits) {
      const LevelMask mask = LevelMask::from_bits(n, bits);
      const PrunedAdc adc(mask);
      const Netlist net = compile_encoder(n, mask);
      const Netlist raw = build_encoder(n, mask);
      for (int bin = 0; bin < (1 << n); ++bin) {
        const double vin = (bin + 0.5) / (1 << n);
        const auto therm = adc.thermometer(vin);
        REQUIRE(simulate(net, therm) == adc.digitize(vin));
        REQUIRE(simulate(raw, therm) == adc.digitize(vin));
      }
    }
  }
}

TEST_CASE("netlist counts agree with the proxy at 3 and 4 bits") {
  for (int n : {3, 4}) {
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << level_count(n)); ++bits) {
      const LevelMask mask = LevelMask::from_bits(n, bits);
      const Netlist net = compile_encoder(n, mask);
      const AreaEstimate a = estimate_area(mask);
      REQUIRE(count_gates(net).or2 == a.or2_gates);
      REQUIRE(net.input_count() == a.comparators);
    }
  }
}

TEST_CASE("HDL emission") {
  const Netlist one = compile_encoder(1, LevelMask::full(1));
  const std::string one_hdl = emit_hdl(one, "enc1");
  CHECK(one_hdl.find("assign code[0] = t1;") != std::string::npos);
  CHECK(count_hdl_primitives(one_hdl) == GateCounts{});

  const LevelMask mask = LevelMask::parse_hex(3, "4F");
  const Netlist net = compile_encoder(3, mask);
  const std::string hdl = emit_hdl(net, "pruned3");
  CHECK(hdl == emit_hdl(net, "pruned3"));
  CHECK(count_hdl_primitives(hdl).or2 == 5);
  std::size_t inputs = 0;
  for (std::size_t pos = hdl.find("input "); pos != std::string::npos; pos = hdl.find("input ", pos + 1)) ++inputs;
  CHECK(inputs == 5);
  CHECK(hdl.find("module pruned3") != std::string::npos);
  CHECK(hdl.find("endmodule") != std::string::npos);
  CHECK_THROWS_AS(emit_hdl(net, "9bad name"), std::invalid_argument);
  CHECK_THROWS_AS(emit_hdl(build_encoder(3, mask), "raw"), std::invalid_argument);

  const std::string empty = emit_hdl(compile_encoder(2, LevelMask::empty(2)), "none");
  CHECK(empty.find("1'b0") != std::string::npos);
}

TEST_CASE("emitted HDL round-trips counts and behaviour on random masks") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const LevelMask mask = LevelMask::from_bits(n, rng() & ((std::uint64_t{1} << level_count(n)) - 1));
    const Netlist net = compile_encoder(n, mask);
    const std::string hdl = emit_hdl(net, "enc");
    REQUIRE(count_hdl_primitives(hdl) == count_gates(net));
    const PrunedAdc adc(mask);
    for (std::size_t ones = 0; ones <= static_cast<std::size_t>(mask.popcount()); ++ones) {
      REQUIRE(run_hdl(hdl, mask, ones) == simulate(net, prefix(static_cast<std::size_t>(mask.popcount()), ones)));
    }
  }
}

TEST_CASE("JSON form") {
  const Netlist net = compile_encoder(3, LevelMask::parse_hex(3, "4F"));
  const auto j = to_json(net);
  CHECK(j.at("bitwidth") == 3);
  CHECK(j.at("mask_hex") == "4F");
  CHECK(j.at("inputs").size() == 5);
  CHECK(j.at("outputs").size() == 3);
  int ors = 0;
  for (const auto& g : j.at("gates")) {
    if (g.at("kind") == "OR2") ++ors;
    CHECK(g.contains("in"));
    CHECK(g.contains("out"));
  }
  CHECK(ors == 5);
  const auto empty = to_json(compile_encoder(2, LevelMask::empty(2)));
  CHECK(empty.at("outputs")[0] == "const0");
}
