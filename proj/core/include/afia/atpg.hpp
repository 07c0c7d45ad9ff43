#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "afia/logic.hpp"
#include "afia/netlist.hpp"
#include "afia/oracle.hpp"
#include "afia/sim.hpp"

namespace afia {

/// A test for a stuck-at fault on one key line.
///
/// Key bits are split three ways: the target itself (in neither map),
/// `constraints` holding recovered bits, and `key_values` holding the free
/// keys the pattern needs at a fixed value. Free keys not listed are X. On a
/// real chip every entry of `key_values` is a register that must be forced by
/// fault injection.
struct TestPattern {
  std::vector<Logic3> pi_values;
  KeyBits key_values;
  KeyBits constraints;
  std::size_t target_key = 0;
  Polarity polarity = Polarity::SA1;
  /// Output values with the target key at its fault-free (activating) value
  /// and at its stuck value. X wherever the pattern leaves the output open.
  std::vector<Logic3> expected_good;
  std::vector<Logic3> expected_faulty;
  std::size_t detect_po = 0;
  /// Assigned free keys that X-minimisation could not prove necessary.
  std::vector<std::size_t> surplus;

  Logic3 good_at_po() const { return expected_good.at(detect_po); }
  Logic3 faulty_at_po() const { return expected_faulty.at(detect_po); }
};

enum class AtpgStatus : std::uint8_t { Detected, Undetectable, Aborted };

std::string_view status_name(AtpgStatus s) noexcept;

struct AtpgOutcome {
  AtpgStatus status = AtpgStatus::Undetectable;
  std::optional<TestPattern> pattern;
  std::uint64_t backtracks = 0;
};

struct AtpgOptions {
  std::uint64_t backtrack_limit = 1'000'000;
  /// Output indices the fault may be observed at. Empty means all outputs.
  std::vector<std::size_t> observe_outputs;
  /// When the search hits the backtrack limit, this many 64-lane words of
  /// random inputs and free keys are simulated looking for a detecting
  /// assignment. Zero disables it. It can only turn ABORTED into DETECTED.
  std::size_t random_words_on_abort = 256;
  std::uint64_t random_seed = 0x5eed;
};

/// Thrown for structurally invalid requests or patterns.
class PatternError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Searches for an input pattern that propagates `polarity` stuck on key
/// `target_key` to an observed output, for every completion of the X inputs
/// and free keys it leaves open. Free keys are searched like primary inputs
/// but are used only when no input-only solution is found first.
AtpgOutcome generate_pattern(const Circuit& c, std::size_t target_key, Polarity polarity,
                             const KeyBits& constraints = {}, const AtpgOptions& opts = {});

/// Same, with the target given as a fault. Throws PatternError unless the
/// fault sits on a key input.
AtpgOutcome generate_pattern(const Circuit& c, Fault target, const KeyBits& constraints = {},
                             const AtpgOptions& opts = {});

/// Throws PatternError when `p` is malformed for `c` (sizes, overlapping key
/// maps, target listed as a constraint). Returns whether three-valued fault
/// simulation reproduces the recorded fault effect at `detect_po`.
bool verify_pattern(const Circuit& c, const TestPattern& p);

/// Checks pattern shape only; throws PatternError.
void check_well_formed(const Circuit& c, const TestPattern& p);

/// One pattern per key, key i targeted with every other key constrained to
/// the stuck value. Outcomes follow key index order.
std::vector<AtpgOutcome> dfa_pattern_set(const Circuit& c, Polarity polarity = Polarity::SA1,
                                         const AtpgOptions& opts = {});

/// `pi=<01X...> keys=<i:v,...> constr=<i:v,...> fault=k<i>:sa<p> po=<j> good=<v> faulty=<v>`
/// Only the detect_po entries of the expected vectors are written.
std::string format_pattern(const TestPattern& p);

/// Inverse of format_pattern. The expected vectors come back sized
/// detect_po + 1, X everywhere except at detect_po. Throws PatternError.
TestPattern parse_pattern(std::string_view line);

}  // namespace afia
