#include "afia/logic.hpp"

#include <stdexcept>
#include <vector>

namespace afia {

char to_char(Logic3 v) noexcept {
  switch (v) {
    case Logic3::Zero: return '0';
    case Logic3::One: return '1';
    default: return 'X';
  }
}

char to_char(Logic5 v) noexcept {
  switch (v) {
    case Logic5::Zero: return '0';
    case Logic5::One: return '1';
    case Logic5::D: return 'D';
    case Logic5::DBar: return 'B';
    default: return 'X';
  }
}

Logic3 logic3_from_char(char c) {
  switch (c) {
    case '0': return Logic3::Zero;
    case '1': return Logic3::One;
    case 'x':
    case 'X': return Logic3::X;
    default: throw std::invalid_argument(std::string("not a logic value: '") + c + "'");
  }
}

Logic5 compose(Logic3 good, Logic3 faulty) noexcept {
  if (good == Logic3::X || faulty == Logic3::X) return Logic5::X;
  if (good == faulty) return good == Logic3::One ? Logic5::One : Logic5::Zero;
  return good == Logic3::One ? Logic5::D : Logic5::DBar;
}

std::pair<Logic3, Logic3> decompose(Logic5 v) noexcept {
  switch (v) {
    case Logic5::Zero: return {Logic3::Zero, Logic3::Zero};
    case Logic5::One: return {Logic3::One, Logic3::One};
    case Logic5::D: return {Logic3::One, Logic3::Zero};
    case Logic5::DBar: return {Logic3::Zero, Logic3::One};
    default: return {Logic3::X, Logic3::X};
  }
}

bool is_inverting(GateKind kind) noexcept {
  return kind == GateKind::Nand || kind == GateKind::Nor || kind == GateKind::Xnor ||
         kind == GateKind::Not;
}

Logic3 eval_gate(GateKind kind, std::span<const Logic3> in) noexcept {
  switch (kind) {
    case GateKind::And:
    case GateKind::Nand: {
      Logic3 r = Logic3::One;
      for (Logic3 v : in) {
        if (v == Logic3::Zero) {
          r = Logic3::Zero;
          break;
        }
        if (v == Logic3::X) r = Logic3::X;
      }
      return kind == GateKind::Nand ? !r : r;
    }
    case GateKind::Or:
    case GateKind::Nor: {
      Logic3 r = Logic3::Zero;
      for (Logic3 v : in) {
        if (v == Logic3::One) {
          r = Logic3::One;
          break;
        }
        if (v == Logic3::X) r = Logic3::X;
      }
      return kind == GateKind::Nor ? !r : r;
    }
    case GateKind::Xor:
    case GateKind::Xnor: {
      bool parity = kind == GateKind::Xnor;
      for (Logic3 v : in) {
        if (v == Logic3::X) return Logic3::X;
        parity ^= (v == Logic3::One);
      }
      return to_logic3(parity);
    }
    case GateKind::Not: return !in[0];
    case GateKind::Buf: return in[0];
    case GateKind::Mux2: {
      const Logic3 s = in[0];
      if (s == Logic3::Zero) return in[1];
      if (s == Logic3::One) return in[2];
      return in[1] == in[2] ? in[1] : Logic3::X;
    }
  }
  return Logic3::X;
}

Logic5 eval_gate5(GateKind kind, std::span<const Logic5> in) {
  std::vector<Logic3> good(in.size()), faulty(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    auto [g, f] = decompose(in[i]);
    good[i] = g;
    faulty[i] = f;
  }
  return compose(eval_gate(kind, good), eval_gate(kind, faulty));
}

std::uint64_t eval_gate_words(GateKind kind, std::span<const std::uint64_t> in) noexcept {
  std::uint64_t r = 0;
  switch (kind) {
    case GateKind::And:
    case GateKind::Nand:
      r = ~std::uint64_t{0};
      for (auto w : in) r &= w;
      return kind == GateKind::Nand ? ~r : r;
    case GateKind::Or:
    case GateKind::Nor:
      for (auto w : in) r |= w;
      return kind == GateKind::Nor ? ~r : r;
    case GateKind::Xor:
    case GateKind::Xnor:
      for (auto w : in) r ^= w;
      return kind == GateKind::Xnor ? ~r : r;
    case GateKind::Not: return ~in[0];
    case GateKind::Buf: return in[0];
    case GateKind::Mux2: return (in[0] & in[2]) | (~in[0] & in[1]);
  }
  return r;
}

std::string_view gate_kind_name(GateKind kind) noexcept {
  switch (kind) {
    case GateKind::And: return "AND";
    case GateKind::Nand: return "NAND";
    case GateKind::Or: return "OR";
    case GateKind::Nor: return "NOR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Not: return "NOT";
    case GateKind::Buf: return "BUF";
    case GateKind::Mux2: return "MUX";
  }
  return "?";
}

}  // namespace afia
