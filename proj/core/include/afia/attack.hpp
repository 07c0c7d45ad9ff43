#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "afia/atpg.hpp"
#include "afia/netlist.hpp"
#include "afia/oracle.hpp"

namespace afia {

enum class AttackMethod : std::uint8_t { Afia, Dfa };

std::string_view method_name(AttackMethod m) noexcept;

/// No pattern could be found for a key under any polarity or observation
/// setting. On a well-formed lock this does not happen.
class UnresolvableKey : public std::runtime_error {
 public:
  UnresolvableKey(std::size_t key, const std::string& detail);
  std::size_t key() const noexcept { return key_; }

 private:
  std::size_t key_;
};

/// The chip answered something the netlist says it cannot.
class OracleInconsistency : public std::runtime_error {
 public:
  OracleInconsistency(std::size_t key, const std::string& detail);
  std::size_t key() const noexcept { return key_; }

 private:
  std::size_t key_;
};

/// Key value implied by one response. `expected_good` and `expected_faulty`
/// are the predicted outputs with the target key at its activating and stuck
/// value; a response matching the faulty prediction means the key holds the
/// stuck value. Throws OracleInconsistency if the predictions are not two
/// distinct determinate values or the response matches neither.
bool decide_key_bit(bool observed, Logic3 expected_good, Logic3 expected_faulty, Polarity polarity);

/// Short form for a detecting output, where the faulty value is the
/// complement of the good one.
bool decide_key_bit(bool observed, bool expected_good, Polarity polarity);

struct VerifyOptions {
  std::size_t exhaustive_limit = 20;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
};

struct VerifyOutcome {
  bool equivalent = false;
  bool exhaustive = false;
  std::uint64_t vectors = 0;
};

/// Compares the netlist under `key` against the chip, fault-free.
VerifyOutcome verify_key(const Circuit& c, const std::vector<bool>& key, Oracle& oracle,
                         const VerifyOptions& opts = {});

struct AttackConfig {
  AtpgOptions atpg;
  bool verify = true;
  VerifyOptions verification;
};

struct BitRecord {
  std::size_t key = 0;
  /// Index into AttackResult::patterns; empty for keys decided without one.
  std::optional<std::size_t> pattern_id;
  std::uint64_t injections = 0;
  bool value = false;
  /// How the bit was decided: "faulty-response", "fault-free-response",
  /// "responses-equal", "responses-differ" or "orphan".
  std::string basis;
  /// Cone the bit was solved in; empty for DFA and orphan keys.
  std::optional<std::size_t> cone;
  /// False when the bit needed every output observable (retry policy).
  bool cone_restricted = true;
};

struct AttackResult {
  AttackMethod method = AttackMethod::Afia;
  std::vector<bool> recovered_key;
  std::size_t pattern_count = 0;
  std::uint64_t total_injected_faults = 0;
  std::uint64_t oracle_queries = 0;
  std::uint64_t atpg_backtracks = 0;
  std::vector<BitRecord> per_bit;
  std::vector<TestPattern> patterns;
  /// Keys that lie in no output cone. They cannot affect the chip and are
  /// reported as 0.
  std::vector<std::size_t> anomalies;
  std::optional<VerifyOutcome> verification;
  double seconds = 0;
};

/// Cone-scheduled attack: solve the cone with the fewest unknown keys first,
/// one constrained pattern per key, injecting only the free keys the pattern
/// fixes. Needs only the locked netlist and black-box access.
AttackResult run_afia(const Circuit& locked, Oracle& oracle, const AttackConfig& cfg = {});

/// Baseline: per key, one pattern applied with every other key forced, once
/// with the target left alone and once with it forced too.
AttackResult run_dfa(const Circuit& locked, Oracle& oracle, const AttackConfig& cfg = {});

AttackResult run_attack(AttackMethod method, const Circuit& locked, Oracle& oracle, const AttackConfig& cfg = {});

struct Accounting {
  AttackMethod method = AttackMethod::Afia;
  std::size_t key_size = 0;
  std::uint64_t total_faults = 0;
  double faults_per_key = 0;
  std::size_t pattern_count = 0;
  bool pattern_bound_ok = true;
  /// K(K-1)/2 for AFIA, 2K^2-K for DFA.
  std::uint64_t fault_bound = 0;
  bool fault_bound_ok = true;
  /// Per-bit injections add up to the total.
  bool ledger_consistent = true;
};

Accounting account(const AttackResult& r);

}  // namespace afia
