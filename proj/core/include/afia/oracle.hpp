#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "afia/logic.hpp"
#include "afia/netlist.hpp"

namespace afia {

/// Partial assignment of key bits, key index -> value.
using KeyBits = std::map<std::size_t, bool>;

/// Black-box access to an activated chip whose key registers can be forced.
///
/// The public entry points validate arguments and keep the counters; derived
/// classes only evaluate. Counters never decrease.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual std::size_t num_inputs() const = 0;
  virtual std::size_t num_outputs() const = 0;
  virtual std::size_t num_keys() const = 0;

  /// Applies one fully specified input pattern with the named key registers
  /// forced. Throws std::invalid_argument on X inputs or out-of-range keys.
  std::vector<bool> respond(std::span<const Logic3> pi, const KeyBits& injections = {});
  std::vector<bool> respond(const std::vector<bool>& pi, const KeyBits& injections = {});

  /// 64 fault-free queries at once, one pattern per bit lane.
  std::vector<std::uint64_t> respond_words(std::span<const std::uint64_t> pi_words);

  std::uint64_t query_count() const noexcept { return queries_; }
  std::uint64_t injected_fault_count() const noexcept { return injected_; }

 protected:
  virtual std::vector<bool> evaluate(const std::vector<bool>& pi, const KeyBits& injections) = 0;
  virtual std::vector<std::uint64_t> evaluate_words(std::span<const std::uint64_t> pi_words) = 0;

 private:
  std::uint64_t queries_ = 0;
  std::uint64_t injected_ = 0;
};

/// Simulated unlocked chip: the locked netlist programmed with a hidden key.
class SimulatedChip final : public Oracle {
 public:
  SimulatedChip(Circuit circuit, std::vector<bool> key);

  std::size_t num_inputs() const override { return circuit_.num_inputs(); }
  std::size_t num_outputs() const override { return circuit_.num_outputs(); }
  std::size_t num_keys() const override { return circuit_.num_keys(); }

 protected:
  std::vector<bool> evaluate(const std::vector<bool>& pi, const KeyBits& injections) override;
  std::vector<std::uint64_t> evaluate_words(std::span<const std::uint64_t> pi_words) override;

 private:
  Circuit circuit_;
  std::vector<bool> key_;
};

}  // namespace afia
