#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afia/logic.hpp"
#include "afia/netlist.hpp"

namespace afia {

enum class Polarity : std::uint8_t { SA0 = 0, SA1 = 1 };

constexpr bool stuck_value(Polarity p) noexcept { return p == Polarity::SA1; }
constexpr Polarity opposite(Polarity p) noexcept { return p == Polarity::SA1 ? Polarity::SA0 : Polarity::SA1; }

/// Single stuck-at fault on a net (stem fault).
struct Fault {
  NetId net = 0;
  Polarity polarity = Polarity::SA1;

  friend bool operator==(const Fault&, const Fault&) = default;
};

/// Three-valued levelized simulation. `pi` and `key` are indexed like
/// `c.inputs()` and `c.key_inputs()`; a shorter span leaves the rest at X.
std::vector<Logic3> simulate(const Circuit& c, std::span<const Logic3> pi, std::span<const Logic3> key);

/// Name-keyed variant; nets not mentioned are X. Throws std::invalid_argument
/// on names that are not primary or key inputs.
std::vector<Logic3> simulate(const Circuit& c, const std::map<std::string, Logic3>& assignment);

/// Values of every net, same indexing as Circuit net ids.
std::vector<Logic3> simulate_nets(const Circuit& c, std::span<const Logic3> pi, std::span<const Logic3> key,
                                  std::optional<std::pair<NetId, Logic3>> forced = std::nullopt);

/// Five-valued simulation with `fault` active. Output i is D or DBar iff the
/// fault is detected there for every completion of the X inputs.
std::vector<Logic5> simulate_faulty(const Circuit& c, std::span<const Logic3> pi, std::span<const Logic3> key,
                                    Fault fault);

/// Bit-parallel two-valued simulation. `pi_words[i]` carries 64 patterns for
/// input i. Returns one word per output.
std::vector<std::uint64_t> simulate_words(const Circuit& c, std::span<const std::uint64_t> pi_words,
                                          std::span<const std::uint64_t> key_words);

/// Key vector as simulation words (all 64 lanes equal).
std::vector<std::uint64_t> broadcast_key(const std::vector<bool>& key);

struct EquivalenceOptions {
  /// Exhaustive enumeration up to this many primary inputs, sampling above.
  std::size_t exhaustive_limit = 20;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
};

struct EquivalenceResult {
  bool equivalent = true;
  bool exhaustive = false;
  std::uint64_t vectors = 0;
  std::optional<std::vector<bool>> counterexample;
};

/// Compares `a` under `key_a` against `b` under `key_b` output by output.
/// Both circuits must have the same number of primary inputs and outputs.
EquivalenceResult check_equivalence(const Circuit& a, const std::vector<bool>& key_a, const Circuit& b,
                                    const std::vector<bool>& key_b, const EquivalenceOptions& opts = {});

/// Draws a value in [0, n) from a 64-bit generator without modulo bias.
/// Portable across standard libraries, unlike std::uniform_int_distribution.
template <class Rng>
std::uint64_t draw_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

}  // namespace afia
