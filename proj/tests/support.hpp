#pragma once

// Helpers shared by the unit and acceptance tests. The evaluators here are
// deliberately naive and do not call into the library simulators, so they can
// serve as independent references.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "afia/netlist.hpp"
#include "afia/sim.hpp"

namespace ref {

inline std::filesystem::path data_dir() { return AFIA_DATA_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(AFIA_FIXTURE_DIR) / name; }

inline bool gate_value(afia::GateKind kind, const std::vector<bool>& in) {
  using afia::GateKind;
  switch (kind) {
    case GateKind::Buf: return in[0];
    case GateKind::Not: return !in[0];
    case GateKind::Mux2: return in[0] ? in[2] : in[1];
    default: break;
  }
  bool all = true, any = false, parity = false;
  for (bool b : in) {
    all = all && b;
    any = any || b;
    parity = parity != b;
  }
  switch (kind) {
    case GateKind::And: return all;
    case GateKind::Nand: return !all;
    case GateKind::Or: return any;
    case GateKind::Nor: return !any;
    case GateKind::Xor: return parity;
    case GateKind::Xnor: return !parity;
    default: return false;
  }
}

/// Recursive two-valued evaluation of every net, memoised.
inline std::vector<bool> eval_nets(const afia::Circuit& c, const std::vector<bool>& pi, const std::vector<bool>& key) {
  const std::size_t n = c.num_nets();
  std::vector<int> state(n, -1);
  std::vector<bool> value(n, false);
  for (std::size_t i = 0; i < c.num_inputs(); ++i) {
    value[c.inputs()[i]] = pi[i];
    state[c.inputs()[i]] = 1;
  }
  for (std::size_t k = 0; k < c.num_keys(); ++k) {
    value[c.key_inputs()[k]] = key[k];
    state[c.key_inputs()[k]] = 1;
  }
  std::function<bool(afia::NetId)> get = [&](afia::NetId net) -> bool {
    if (state[net] == 1) return value[net];
    const auto& g = c.gates()[*c.driver(net)];
    std::vector<bool> in;
    for (auto f : g.fanins) in.push_back(get(f));
    value[net] = gate_value(g.kind, in);
    state[net] = 1;
    return value[net];
  };
  for (afia::NetId net = 0; net < n; ++net) get(net);
  return value;
}

inline std::vector<bool> eval(const afia::Circuit& c, const std::vector<bool>& pi, const std::vector<bool>& key) {
  const auto nets = eval_nets(c, pi, key);
  std::vector<bool> out;
  for (auto o : c.outputs()) out.push_back(nets[o]);
  return out;
}

inline std::vector<bool> bits(std::uint64_t v, std::size_t n) {
  std::vector<bool> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (v >> i) & 1;
  return b;
}

/// Nets reachable backwards from `net`, by depth-first search.
inline std::set<afia::NetId> fanin_closure(const afia::Circuit& c, afia::NetId net) {
  std::set<afia::NetId> seen;
  std::vector<afia::NetId> stack{net};
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (auto d = c.driver(n))
      for (auto f : c.gates()[*d].fanins) stack.push_back(f);
  }
  return seen;
}

/// Exhaustive search for an assignment of PIs and free keys that makes the
/// target key's stuck-at fault visible at one of `observed` (all if empty).
inline bool detectable_by_enumeration(const afia::Circuit& c, std::size_t target, afia::Polarity pol,
                                      const std::map<std::size_t, bool>& constraints,
                                      const std::vector<std::size_t>& observed = {}) {
  std::vector<std::size_t> free_keys;
  for (std::size_t k = 0; k < c.num_keys(); ++k)
    if (k != target && !constraints.count(k)) free_keys.push_back(k);
  const std::size_t width = c.num_inputs() + free_keys.size();
  const bool stuck = afia::stuck_value(pol);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << width); ++v) {
    const auto pi = bits(v, c.num_inputs());
    std::vector<bool> key(c.num_keys());
    for (const auto& [k, b] : constraints) key[k] = b;
    for (std::size_t i = 0; i < free_keys.size(); ++i) key[free_keys[i]] = (v >> (c.num_inputs() + i)) & 1;
    key[target] = !stuck;
    const auto good = eval(c, pi, key);
    key[target] = stuck;
    const auto bad = eval(c, pi, key);
    for (std::size_t o = 0; o < c.num_outputs(); ++o) {
      const bool watched = observed.empty() || std::find(observed.begin(), observed.end(), o) != observed.end();
      if (watched && good[o] != bad[o]) return true;
    }
  }
  return false;
}

}  // namespace ref
