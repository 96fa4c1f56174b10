#include "adcprune/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace adcprune {
namespace {

int arity(GateKind kind) {
  switch (kind) {
    case GateKind::And2:
    case GateKind::Or2:
      return 2;
    case GateKind::Inv:
    case GateKind::Wire:
      return 1;
    case GateKind::Const0:
      return 0;
  }
  return -1;
}

bool valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  const auto first = static_cast<unsigned char>(name.front());
  if (!std::isalpha(first) && first != '_') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '$';
  });
}

// Incremental builder that hands out fresh nets in gate order.
class Builder {
 public:
  explicit Builder(const LevelMask& mask) : mask_(mask) {
    for (int level : mask.levels()) names_.push_back("t" + std::to_string(level));
  }

  NetId add(GateKind kind, std::vector<NetId> inputs, std::string name) {
    const NetId out = static_cast<NetId>(names_.size());
    gates_.push_back({kind, std::move(inputs), out});
    names_.push_back(std::move(name));
    return out;
  }

  Netlist finish(std::vector<NetId> outputs) && {
    return Netlist(mask_, std::move(gates_), std::move(outputs), std::move(names_));
  }

 private:
  LevelMask mask_;
  std::vector<Gate> gates_;
  std::vector<std::string> names_;
};

}  // namespace

std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::And2: return "AND2";
    case GateKind::Or2: return "OR2";
    case GateKind::Inv: return "INV";
    case GateKind::Const0: return "CONST0";
    case GateKind::Wire: return "WIRE";
  }
  return "?";
}

int GateCounts::of(GateKind kind) const {
  switch (kind) {
    case GateKind::And2: return and2;
    case GateKind::Or2: return or2;
    case GateKind::Inv: return inv;
    case GateKind::Const0: return const0;
    case GateKind::Wire: return wire;
  }
  return 0;
}

Netlist::Netlist(LevelMask mask, std::vector<Gate> gates, std::vector<NetId> outputs,
                 std::vector<std::string> net_names)
    : mask_(mask), gates_(std::move(gates)), outputs_(std::move(outputs)),
      names_(std::move(net_names)) {
  const int inputs = input_count();
  if (static_cast<int>(names_.size()) != net_count()) {
    throw std::invalid_argument("netlist needs one name per net");
  }
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    const Gate& g = gates_[i];
    const NetId own = inputs + static_cast<NetId>(i);
    if (g.output != own) throw std::invalid_argument("gate outputs must be numbered in order");
    if (static_cast<int>(g.inputs.size()) != arity(g.kind)) {
      throw std::invalid_argument("gate " + std::to_string(i) + " has wrong arity");
    }
    for (NetId in : g.inputs) {
      if (in != kConstZero && (in < 0 || in >= own)) {
        throw std::invalid_argument("gate " + std::to_string(i) +
                                    " reads a net that is not yet driven");
      }
    }
  }
  if (static_cast<int>(outputs_.size()) != bitwidth()) {
    throw std::invalid_argument("netlist output count must equal the bitwidth");
  }
  for (NetId out : outputs_) {
    if (out != kConstZero && (out < 0 || out >= net_count())) {
      throw std::invalid_argument("netlist output references an unknown net");
    }
  }
}

std::string Netlist::net_name(NetId net) const {
  if (net == kConstZero) return "const0";
  return names_.at(static_cast<std::size_t>(net));
}

Netlist build_encoder(int bitwidth, const LevelMask& mask) {
  if (mask.bitwidth() != bitwidth) {
    throw std::invalid_argument("mask has " + std::to_string(mask.size()) +
                                " levels, expected " + std::to_string(level_count(bitwidth)));
  }
  Builder b(mask);
  const std::vector<int> levels = mask.levels();
  const std::size_t k = levels.size();

  std::vector<NetId> one_hot(k);
  for (std::size_t m = 0; m < k; ++m) {
    const auto input = static_cast<NetId>(m);
    const std::string name = "oh" + std::to_string(levels[m]);
    if (m + 1 == k) {
      one_hot[m] = b.add(GateKind::Wire, {input}, name);
    } else {
      const NetId inverted = b.add(GateKind::Inv, {static_cast<NetId>(m + 1)},
                                   "tn" + std::to_string(levels[m + 1]));
      one_hot[m] = b.add(GateKind::And2, {input, inverted}, name);
    }
  }

  std::vector<NetId> outputs;
  for (int bit = 0; bit < bitwidth; ++bit) {
    const std::string prefix = "b" + std::to_string(bit);
    std::vector<NetId> terms;
    for (std::size_t m = 0; m < k; ++m) {
      if ((levels[m] >> bit) & 1) terms.push_back(one_hot[m]);
    }
    if (terms.empty()) {
      outputs.push_back(b.add(GateKind::Const0, {}, prefix + "_c0"));
      continue;
    }
    if (terms.size() == 1) {
      outputs.push_back(b.add(GateKind::Wire, {terms.front()}, prefix));
      continue;
    }
    int node = 0;
    while (terms.size() > 1) {
      std::vector<NetId> next;
      for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
        next.push_back(b.add(GateKind::Or2, {terms[i], terms[i + 1]},
                             prefix + "_" + std::to_string(node++)));
      }
      if (terms.size() % 2 == 1) next.push_back(terms.back());
      terms = std::move(next);
    }
    outputs.push_back(terms.front());
  }
  return std::move(b).finish(std::move(outputs));
}

Netlist simplify(const Netlist& net) {
  const int inputs = net.input_count();
  // Where each original net ends up after elision.
  std::vector<NetId> alias(static_cast<std::size_t>(net.net_count()));
  for (int i = 0; i < inputs; ++i) alias[static_cast<std::size_t>(i)] = i;
  auto resolve = [&](NetId n) { return n == kConstZero ? kConstZero : alias[static_cast<std::size_t>(n)]; };

  struct Pending {
    GateKind kind;
    std::vector<NetId> inputs;  // in original-net terms, already resolved
    NetId original;
  };
  std::vector<Pending> kept;
  for (const Gate& g : net.gates()) {
    std::vector<NetId> in;
    for (NetId n : g.inputs) in.push_back(resolve(n));
    auto& slot = alias[static_cast<std::size_t>(g.output)];
    switch (g.kind) {
      case GateKind::Wire:
        slot = in[0];
        continue;
      case GateKind::Const0:
        slot = kConstZero;
        continue;
      case GateKind::And2:
        if (in[0] == kConstZero || in[1] == kConstZero) {
          slot = kConstZero;
          continue;
        }
        break;
      case GateKind::Or2:
        if (in[0] == kConstZero) {
          slot = in[1];
          continue;
        }
        if (in[1] == kConstZero) {
          slot = in[0];
          continue;
        }
        break;
      case GateKind::Inv:
        break;
    }
    slot = g.output;
    kept.push_back({g.kind, std::move(in), g.output});
  }

  std::vector<NetId> outputs;
  for (NetId o : net.outputs()) outputs.push_back(resolve(o));

  // Dead-gate removal, walking backwards from the outputs.
  std::vector<bool> live(static_cast<std::size_t>(net.net_count()), false);
  for (NetId o : outputs) {
    if (o != kConstZero) live[static_cast<std::size_t>(o)] = true;
  }
  for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
    if (!live[static_cast<std::size_t>(it->original)]) continue;
    for (NetId n : it->inputs) {
      if (n != kConstZero) live[static_cast<std::size_t>(n)] = true;
    }
  }

  std::vector<NetId> renumber(static_cast<std::size_t>(net.net_count()), kConstZero);
  std::vector<std::string> names;
  for (int i = 0; i < inputs; ++i) {
    renumber[static_cast<std::size_t>(i)] = i;
    names.push_back(net.net_name(i));
  }
  auto remap = [&](NetId n) { return n == kConstZero ? kConstZero : renumber[static_cast<std::size_t>(n)]; };
  std::vector<Gate> gates;
  for (const Pending& p : kept) {
    if (!live[static_cast<std::size_t>(p.original)]) continue;
    const NetId out = inputs + static_cast<NetId>(gates.size());
    Gate g{p.kind, {}, out};
    for (NetId n : p.inputs) g.inputs.push_back(remap(n));
    gates.push_back(std::move(g));
    renumber[static_cast<std::size_t>(p.original)] = out;
    names.push_back(net.net_name(p.original));
  }
  for (NetId& o : outputs) o = remap(o);
  return Netlist(net.mask(), std::move(gates), std::move(outputs), std::move(names));
}

Netlist compile_encoder(int bitwidth, const LevelMask& mask) {
  return simplify(build_encoder(bitwidth, mask));
}

int simulate(const Netlist& net, const std::vector<bool>& thermometer) {
  const int inputs = net.input_count();
  if (static_cast<int>(thermometer.size()) != inputs) {
    throw std::invalid_argument("thermometer has " + std::to_string(thermometer.size()) +
                                " bits, netlist has " + std::to_string(inputs) + " inputs");
  }
  for (std::size_t i = 1; i < thermometer.size(); ++i) {
    if (thermometer[i] && !thermometer[i - 1]) {
      throw std::invalid_argument("invalid thermometer code: a set bit above a cleared bit");
    }
  }
  std::vector<bool> value(static_cast<std::size_t>(net.net_count()), false);
  for (int i = 0; i < inputs; ++i) value[static_cast<std::size_t>(i)] = thermometer[static_cast<std::size_t>(i)];
  auto read = [&](NetId n) { return n != kConstZero && value[static_cast<std::size_t>(n)]; };
  for (const Gate& g : net.gates()) {
    bool v = false;
    switch (g.kind) {
      case GateKind::And2: v = read(g.inputs[0]) && read(g.inputs[1]); break;
      case GateKind::Or2: v = read(g.inputs[0]) || read(g.inputs[1]); break;
      case GateKind::Inv: v = !read(g.inputs[0]); break;
      case GateKind::Wire: v = read(g.inputs[0]); break;
      case GateKind::Const0: v = false; break;
    }
    value[static_cast<std::size_t>(g.output)] = v;
  }
  int code = 0;
  for (std::size_t bit = 0; bit < net.outputs().size(); ++bit) {
    if (read(net.outputs()[bit])) code |= 1 << bit;
  }
  return code;
}

GateCounts count_gates(const Netlist& net) {
  GateCounts c;
  for (const Gate& g : net.gates()) {
    switch (g.kind) {
      case GateKind::And2: ++c.and2; break;
      case GateKind::Or2: ++c.or2; break;
      case GateKind::Inv: ++c.inv; break;
      case GateKind::Const0: ++c.const0; break;
      case GateKind::Wire: ++c.wire; break;
    }
  }
  return c;
}

std::string emit_hdl(const Netlist& net, std::string_view module_name) {
  if (!valid_identifier(module_name)) {
    throw std::invalid_argument("invalid HDL module name '" + std::string(module_name) + "'");
  }
  for (const Gate& g : net.gates()) {
    if (g.kind == GateKind::Wire || g.kind == GateKind::Const0) {
      throw std::invalid_argument("emit_hdl expects a simplified netlist");
    }
  }
  auto ref = [&](NetId n) { return n == kConstZero ? std::string("1'b0") : net.net_name(n); };

  std::ostringstream os;
  os << "// flash ADC encoder: bits=" << net.bitwidth() << " mask=" << net.mask().to_hex()
     << " comparators=" << net.input_count() << "\n";
  os << "module " << module_name << " (\n";
  for (int i = 0; i < net.input_count(); ++i) os << "  input  wire " << net.net_name(i) << ",\n";
  os << "  output wire [" << net.bitwidth() - 1 << ":0] code\n";
  os << ");\n";
  for (const Gate& g : net.gates()) os << "  wire " << net.net_name(g.output) << ";\n";
  int instance = 0;
  for (const Gate& g : net.gates()) {
    const char* prim = g.kind == GateKind::And2 ? "and" : g.kind == GateKind::Or2 ? "or " : "not";
    os << "  " << prim << " g" << instance++ << " (" << net.net_name(g.output);
    for (NetId n : g.inputs) os << ", " << ref(n);
    os << ");\n";
  }
  for (int bit = net.bitwidth() - 1; bit >= 0; --bit) {
    os << "  assign code[" << bit << "] = " << ref(net.outputs()[static_cast<std::size_t>(bit)])
       << ";\n";
  }
  os << "endmodule\n";
  return os.str();
}

GateCounts count_hdl_primitives(std::string_view hdl) {
  GateCounts c;
  std::istringstream is{std::string(hdl)};
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "and") ++c.and2;
    else if (word == "or") ++c.or2;
    else if (word == "not") ++c.inv;
  }
  return c;
}

nlohmann::json to_json(const Netlist& net) {
  nlohmann::json j;
  j["bitwidth"] = net.bitwidth();
  j["mask_hex"] = net.mask().to_hex();
  auto& inputs = j["inputs"] = nlohmann::json::array();
  for (int i = 0; i < net.input_count(); ++i) inputs.push_back(net.net_name(i));
  auto& gates = j["gates"] = nlohmann::json::array();
  for (const Gate& g : net.gates()) {
    nlohmann::json in = nlohmann::json::array();
    for (NetId n : g.inputs) in.push_back(net.net_name(n));
    gates.push_back({{"kind", to_string(g.kind)}, {"in", std::move(in)}, {"out", net.net_name(g.output)}});
  }
  auto& outputs = j["outputs"] = nlohmann::json::array();
  for (NetId o : net.outputs()) outputs.push_back(net.net_name(o));
  return j;
}

}  // namespace adcprune
