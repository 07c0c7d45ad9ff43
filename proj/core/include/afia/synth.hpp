#pragma once

#include <cstdint>
#include <string>

#include "afia/netlist.hpp"

namespace afia {

/// Shape of a random combinational circuit.
///
/// Gates are grown in one cluster per output. Each cluster draws mostly from
/// its own slice of the primary and key inputs; `cross_fanin` is the chance
/// that a fanin is taken from another cluster instead, which is what makes
/// output cones overlap.
struct SynthParams {
  std::string name = "synth";
  std::size_t inputs = 5;
  std::size_t outputs = 2;
  std::size_t gates_per_output = 4;
  std::size_t keys = 0;
  std::size_t max_fanin = 3;
  double cross_fanin = 0.1;
  /// Share of XOR/XNOR among multi-input gates. ISCAS-85 control logic has
  /// few of them, and they are what makes random logic hard to test.
  double xor_share = 0.1;
  bool allow_mux = false;
};

/// Deterministic for a given (params, seed). Every primary and key input is
/// read by at least one gate and every gate reaches an output.
Circuit random_circuit(const SynthParams& params, std::uint64_t seed);

}  // namespace afia
