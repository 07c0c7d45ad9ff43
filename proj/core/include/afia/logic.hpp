#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace afia {

/// Three-valued logic used for plain simulation and don't-care patterns.
enum class Logic3 : std::uint8_t { Zero = 0, One = 1, X = 2 };

/// Five-valued D-calculus. D is good 1 / faulty 0, DBar is good 0 / faulty 1.
enum class Logic5 : std::uint8_t { Zero, One, X, D, DBar };

enum class GateKind : std::uint8_t { And, Nand, Or, Nor, Xor, Xnor, Not, Buf, Mux2 };

constexpr Logic3 to_logic3(bool b) noexcept { return b ? Logic3::One : Logic3::Zero; }
constexpr bool is_known(Logic3 v) noexcept { return v != Logic3::X; }

constexpr Logic3 operator!(Logic3 v) noexcept {
  switch (v) {
    case Logic3::Zero: return Logic3::One;
    case Logic3::One: return Logic3::Zero;
    default: return Logic3::X;
  }
}

char to_char(Logic3 v) noexcept;
char to_char(Logic5 v) noexcept;
/// Accepts 0, 1, x, X. Throws std::invalid_argument otherwise.
Logic3 logic3_from_char(char c);

/// Composite value from (good, faulty) components; any X component gives X.
Logic5 compose(Logic3 good, Logic3 faulty) noexcept;
std::pair<Logic3, Logic3> decompose(Logic5 v) noexcept;

/// True for gates whose output is the complement of the base function.
bool is_inverting(GateKind kind) noexcept;

/// Evaluates one gate under Kleene three-valued rules. MUX2 fanins are
/// (select, in0, in1).
Logic3 eval_gate(GateKind kind, std::span<const Logic3> in) noexcept;

/// Evaluates one gate component-wise on (good, faulty) pairs.
Logic5 eval_gate5(GateKind kind, std::span<const Logic5> in);

/// Bit-parallel two-valued evaluation, one pattern per bit.
std::uint64_t eval_gate_words(GateKind kind, std::span<const std::uint64_t> in) noexcept;

std::string_view gate_kind_name(GateKind kind) noexcept;

}  // namespace afia
