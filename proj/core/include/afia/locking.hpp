#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "afia/netlist.hpp"
#include "afia/oracle.hpp"

namespace afia {

enum class LockScheme : std::uint8_t {
  Rll,      ///< XOR/XNOR key gates on random observable nets.
  Chain,    ///< Key gates cascaded in series on one output.
  Restore,  ///< Comparator-based restoration unit cancelling a perturbation.
};

std::string_view scheme_name(LockScheme s) noexcept;
/// Accepts rll, chain, restore (any case). Throws std::invalid_argument.
LockScheme parse_scheme(std::string_view name);

struct LockRecipe {
  LockScheme scheme = LockScheme::Rll;
  std::size_t key_size = 1;
  std::uint64_t seed = 0;
};

struct LockedDesign {
  Circuit circuit;
  std::vector<bool> correct_key;
  LockRecipe recipe;
};

class LockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gate nets whose flip is visible at some output (exhaustive for small
/// circuits, 4096 random vectors otherwise). Declaration order.
std::vector<NetId> observable_nets(const Circuit& c, std::uint64_t seed = 0x5eed);

LockedDesign lock_rll(const Circuit& c, std::size_t key_size, std::uint64_t seed);
LockedDesign lock_chain(const Circuit& c, std::size_t key_size, std::uint64_t seed);
LockedDesign lock_restore(const Circuit& c, std::size_t key_size, std::uint64_t seed);
LockedDesign lock(const Circuit& c, const LockRecipe& recipe);

/// Key sidecar text: one line of K characters, k_{K-1} first.
std::string format_key(const std::vector<bool>& key);
std::vector<bool> parse_key(std::string_view text);
std::vector<bool> read_key_file(const std::filesystem::path& path);
void write_key_file(const std::vector<bool>& key, const std::filesystem::path& path);

/// Hex form of a key with k_0 as the least significant bit.
std::string key_to_hex(const std::vector<bool>& key);

/// Programs the locked netlist with its correct key.
SimulatedChip activate(const LockedDesign& design);

}  // namespace afia
