#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "adcprune/level_mask.hpp"
#include "json.hpp"

namespace adcprune {

enum class GateKind { And2, Or2, Inv, Const0, Wire };

std::string_view to_string(GateKind kind);

/// Net handle. Nets 0..k-1 are the thermometer inputs (one per surviving
/// level, ascending); gate i drives net k + i. kConstZero is the tied-low net.
using NetId = int;
inline constexpr NetId kConstZero = -1;

struct Gate {
  GateKind kind = GateKind::Wire;
  std::vector<NetId> inputs;
  NetId output = 0;
};

struct GateCounts {
  int and2 = 0;
  int or2 = 0;
  int inv = 0;
  int const0 = 0;
  int wire = 0;

  int of(GateKind kind) const;
  int logic_gates() const { return and2 + or2 + inv; }

  friend bool operator==(const GateCounts&, const GateCounts&) = default;
};

/// Gate-level thermometer-to-binary encoder of one pruned flash ADC.
/// Immutable once built; the constructor checks arity, acyclicity (every gate
/// reads only inputs, the constant, or earlier gates) and output width.
class Netlist {
 public:
  Netlist(LevelMask mask, std::vector<Gate> gates, std::vector<NetId> outputs,
          std::vector<std::string> net_names);

  int bitwidth() const noexcept { return mask_.bitwidth(); }
  const LevelMask& mask() const noexcept { return mask_; }
  int input_count() const noexcept { return mask_.popcount(); }
  int net_count() const noexcept { return input_count() + static_cast<int>(gates_.size()); }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  /// Index i drives output bit i.
  const std::vector<NetId>& outputs() const noexcept { return outputs_; }
  /// Level-indexed names: t<l> inputs, tn<l> inverters, oh<l> one-hot lines,
  /// b<i>_<j> OR-tree nodes of output bit i.
  std::string net_name(NetId net) const;

 private:
  LevelMask mask_;
  std::vector<Gate> gates_;
  std::vector<NetId> outputs_;
  std::vector<std::string> names_;
};

/// Encoder exactly as constructed, before simplification: one-hot stage
/// oh(l) = T(l) AND NOT T(next surviving level), topmost oh = WIRE(T(l)),
/// then per output bit a balanced OR2 tree, a WIRE for single members, or a
/// CONST0 when no surviving level has that bit set.
Netlist build_encoder(int bitwidth, const LevelMask& mask);

/// Constant propagation, wire elision and dead-gate removal. Leaves only
/// AND2/OR2/INV; constant outputs reference kConstZero.
Netlist simplify(const Netlist& net);

/// build_encoder followed by simplify.
Netlist compile_encoder(int bitwidth, const LevelMask& mask);

/// Evaluates the netlist on one thermometer vector (ascending surviving
/// levels). Throws std::invalid_argument on a wrong length or a vector that is
/// not a prefix of ones.
int simulate(const Netlist& net, const std::vector<bool>& thermometer);

GateCounts count_gates(const Netlist& net);

/// Structural Verilog: one module, inputs t<l>, output bus `code`, only
/// not/and/or primitive instances plus constant assigns. Deterministic.
std::string emit_hdl(const Netlist& net, std::string_view module_name);

/// Counts primitive instance lines in text produced by emit_hdl.
GateCounts count_hdl_primitives(std::string_view hdl);

/// {bitwidth, mask_hex, inputs, gates:[{kind,in,out}], outputs}; refs are net
/// names, the constant is "const0".
nlohmann::json to_json(const Netlist& net);

}  // namespace adcprune
