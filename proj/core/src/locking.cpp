#include "afia/locking.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "afia/sim.hpp"

namespace afia {

namespace {

// Hands out net names that collide neither with the source circuit nor with
// anything generated earlier.
class Names {
 public:
  explicit Names(const Circuit& c) {
    for (NetId n = 0; n < c.num_nets(); ++n) used_.insert(c.net_name(n));
  }

  std::string fresh(const std::string& base) {
    std::string name = base;
    for (int i = 1; used_.count(name); ++i) name = base + "_" + std::to_string(i);
    used_.insert(name);
    return name;
  }

 private:
  std::unordered_set<std::string> used_;
};

void require_plain(const Circuit& c, std::size_t key_size) {
  if (key_size == 0) throw LockError("key size must be at least 1");
  if (c.num_keys() != 0) throw LockError("circuit '" + c.name() + "' already has key inputs");
  if (c.num_outputs() == 0) throw LockError("circuit '" + c.name() + "' has no outputs");
}

std::vector<bool> random_key(std::mt19937_64& rng, std::size_t k) {
  std::vector<bool> key(k);
  for (std::size_t i = 0; i < k; ++i) key[i] = rng() & 1U;
  return key;
}

// First `k` entries of a seeded partial Fisher-Yates shuffle.
template <class T>
std::vector<T> pick(std::vector<T> pool, std::size_t k, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + draw_below(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<std::string> fanin_names(const Circuit& c, const Gate& g) {
  std::vector<std::string> names;
  names.reserve(g.fanins.size());
  for (NetId f : g.fanins) names.push_back(c.net_name(f));
  return names;
}

// Balanced AND tree with fanin at most four. Returns the root net name.
std::string and_tree(CircuitBuilder& b, Names& names, std::vector<std::string> leaves, const std::string& stem) {
  int level = 0;
  while (leaves.size() > 1) {
    std::vector<std::string> next;
    for (std::size_t i = 0; i < leaves.size(); i += 4) {
      const std::size_t end = std::min(leaves.size(), i + 4);
      if (end - i == 1) {
        next.push_back(leaves[i]);
        continue;
      }
      const auto out = names.fresh(stem + "_l" + std::to_string(level) + "_" + std::to_string(i / 4));
      b.add_gate(out, GateKind::And, {leaves.begin() + static_cast<std::ptrdiff_t>(i),
                                      leaves.begin() + static_cast<std::ptrdiff_t>(end)});
      next.push_back(out);
    }
    leaves = std::move(next);
    ++level;
  }
  return leaves.front();
}

// Copies `c` with `target` renamed to `pre` everywhere. Readers of the old net
// keep reading the unlocked value; only the output sees the lock logic.
CircuitBuilder copy_with_detached_output(const Circuit& c, NetId target, const std::string& pre,
                                         const std::vector<std::string>& key_names) {
  CircuitBuilder b(c.name());
  for (NetId n : c.inputs()) b.add_input(c.net_name(n));
  for (const auto& k : key_names) b.add_key_input(k);
  for (const Gate& g : c.gates()) {
    auto fanins = fanin_names(c, g);
    for (std::size_t i = 0; i < fanins.size(); ++i)
      if (g.fanins[i] == target) fanins[i] = pre;
    b.add_gate(g.out == target ? pre : c.net_name(g.out), g.kind, std::move(fanins));
  }
  return b;
}

// The locked output keeps its name when it is a gate net. A primary input used
// directly as an output cannot be renamed, so the locked copy gets a new name.
struct OutputSplit {
  NetId target;
  std::string pre;
  std::string locked;
};

OutputSplit split_output(const Circuit& c, std::size_t output_index, Names& names) {
  const NetId y = c.outputs()[output_index];
  const std::string& yn = c.net_name(y);
  if (c.role(y) == NetRole::Gate) return {y, names.fresh(yn + "_pre"), yn};
  return {y, yn, names.fresh(yn + "_locked")};
}

void add_outputs(CircuitBuilder& b, const Circuit& c, std::size_t locked_index, const std::string& locked) {
  for (std::size_t i = 0; i < c.num_outputs(); ++i)
    b.add_output(i == locked_index ? locked : c.net_name(c.outputs()[i]));
}

std::vector<std::string> key_input_names(Names& names, std::size_t k) {
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(names.fresh("keyinput" + std::to_string(i)));
  return out;
}

}  // namespace

std::string_view scheme_name(LockScheme s) noexcept {
  switch (s) {
    case LockScheme::Rll: return "rll";
    case LockScheme::Chain: return "chain";
    case LockScheme::Restore: return "restore";
  }
  return "?";
}

LockScheme parse_scheme(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "rll") return LockScheme::Rll;
  if (lower == "chain") return LockScheme::Chain;
  if (lower == "restore") return LockScheme::Restore;
  throw std::invalid_argument("unknown locking scheme '" + std::string(name) + "'");
}

std::vector<NetId> observable_nets(const Circuit& c, std::uint64_t seed) {
  const std::size_t n = c.num_inputs();
  const bool exhaustive = n <= 12;
  const std::size_t blocks = exhaustive ? std::max<std::size_t>(1, (std::size_t{1} << n) / 64) : 64;

  std::vector<bool> seen(c.num_nets(), false);
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> v(c.num_nets());
  std::vector<std::uint64_t> flipped;
  std::vector<std::uint64_t> in;
  const auto topo = c.topo();
  std::vector<std::size_t> topo_pos(c.num_gates());
  for (std::size_t i = 0; i < topo.size(); ++i) topo_pos[topo[i]] = i;

  auto eval = [&](std::vector<std::uint64_t>& vals, std::size_t gi) {
    const Gate& g = c.gates()[gi];
    in.clear();
    for (NetId f : g.fanins) in.push_back(vals[f]);
    vals[g.out] = eval_gate_words(g.kind, in);
  };

  for (std::size_t blk = 0; blk < blocks; ++blk) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!exhaustive) {
        v[c.inputs()[i]] = rng();
      } else if (i < 6) {
        static constexpr std::uint64_t kMasks[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL,
                                                    0xF0F0F0F0F0F0F0F0ULL, 0xFF00FF00FF00FF00ULL,
                                                    0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
        v[c.inputs()[i]] = kMasks[i];
      } else {
        v[c.inputs()[i]] = ((blk >> (i - 6)) & 1U) ? ~std::uint64_t{0} : 0;
      }
    }
    for (auto gi : topo) eval(v, gi);

    for (std::size_t gi = 0; gi < c.num_gates(); ++gi) {
      const NetId net = c.gates()[gi].out;
      if (seen[net]) continue;
      flipped = v;
      flipped[net] = ~v[net];
      for (std::size_t t = topo_pos[gi] + 1; t < topo.size(); ++t) eval(flipped, topo[t]);
      for (NetId o : c.outputs()) {
        if (flipped[o] != v[o]) {
          seen[net] = true;
          break;
        }
      }
    }
  }

  std::vector<NetId> out;
  for (const Gate& g : c.gates())
    if (seen[g.out]) out.push_back(g.out);
  return out;
}

LockedDesign lock_rll(const Circuit& c, std::size_t key_size, std::uint64_t seed) {
  require_plain(c, key_size);
  const auto candidates = observable_nets(c, seed ^ 0x9e3779b97f4a7c15ULL);
  if (candidates.size() < key_size)
    throw LockError("circuit '" + c.name() + "' has " + std::to_string(candidates.size()) +
                    " observable gate nets, cannot place " + std::to_string(key_size) + " key gates");

  std::mt19937_64 rng(seed);
  const auto chosen = pick(candidates, key_size, rng);
  const auto key = random_key(rng, key_size);

  Names names(c);
  const auto keys = key_input_names(names, key_size);
  std::unordered_map<NetId, std::size_t> slot;
  for (std::size_t i = 0; i < chosen.size(); ++i) slot[chosen[i]] = i;

  // Key gates replace the original net, so every reader sees the keyed value.
  std::unordered_map<NetId, std::string> pre;
  for (NetId n : chosen) pre[n] = names.fresh(c.net_name(n) + "_pre");

  CircuitBuilder b(c.name());
  for (NetId n : c.inputs()) b.add_input(c.net_name(n));
  for (const auto& k : keys) b.add_key_input(k);
  for (const Gate& g : c.gates()) {
    const auto it = slot.find(g.out);
    if (it == slot.end()) {
      b.add_gate(c.net_name(g.out), g.kind, fanin_names(c, g));
      continue;
    }
    const std::size_t i = it->second;
    b.add_gate(pre[g.out], g.kind, fanin_names(c, g));
    b.add_gate(c.net_name(g.out), key[i] ? GateKind::Xnor : GateKind::Xor, {pre[g.out], keys[i]});
  }
  for (NetId o : c.outputs()) b.add_output(c.net_name(o));

  return {b.build(), key, {LockScheme::Rll, key_size, seed}};
}

LockedDesign lock_chain(const Circuit& c, std::size_t key_size, std::uint64_t seed) {
  require_plain(c, key_size);
  std::mt19937_64 rng(seed);
  const std::size_t out_index = draw_below(rng, c.num_outputs());
  const auto key = random_key(rng, key_size);

  Names names(c);
  const auto keys = key_input_names(names, key_size);
  const auto split = split_output(c, out_index, names);
  auto b = copy_with_detached_output(c, split.target, split.pre, keys);

  std::string prev = split.pre;
  for (std::size_t i = 0; i < key_size; ++i) {
    const auto out = i + 1 == key_size ? split.locked : names.fresh("chain" + std::to_string(i));
    b.add_gate(out, key[i] ? GateKind::Xnor : GateKind::Xor, {prev, keys[i]});
    prev = out;
  }
  add_outputs(b, c, out_index, split.locked);
  return {b.build(), key, {LockScheme::Chain, key_size, seed}};
}

LockedDesign lock_restore(const Circuit& c, std::size_t key_size, std::uint64_t seed) {
  require_plain(c, key_size);
  if (key_size > c.num_inputs())
    throw LockError("restore locking needs at least " + std::to_string(key_size) + " primary inputs, circuit '" +
                    c.name() + "' has " + std::to_string(c.num_inputs()));
  std::mt19937_64 rng(seed);
  const std::size_t out_index = draw_below(rng, c.num_outputs());
  std::vector<NetId> pis(c.inputs().begin(), c.inputs().end());
  const auto selected = pick(std::move(pis), key_size, rng);
  const auto key = random_key(rng, key_size);

  Names names(c);
  const auto keys = key_input_names(names, key_size);
  const auto split = split_output(c, out_index, names);
  auto b = copy_with_detached_output(c, split.target, split.pre, keys);

  // The perturbation fires on the protected pattern x_S == key; the restore
  // unit fires on x_S == applied key. With the right key they cancel.
  std::vector<std::string> literals;
  std::vector<std::string> compares;
  for (std::size_t i = 0; i < key_size; ++i) {
    const auto& x = c.net_name(selected[i]);
    if (key[i]) {
      literals.push_back(x);
    } else {
      const auto inv = names.fresh("perturb_n" + std::to_string(i));
      b.add_gate(inv, GateKind::Not, {x});
      literals.push_back(inv);
    }
    const auto cmp = names.fresh("restore_cmp" + std::to_string(i));
    b.add_gate(cmp, GateKind::Xnor, {x, keys[i]});
    compares.push_back(cmp);
  }
  const auto perturb = and_tree(b, names, std::move(literals), "perturb");
  const auto restore = and_tree(b, names, std::move(compares), "restore");
  const auto flipped = names.fresh(split.locked + "_flip");
  b.add_gate(flipped, GateKind::Xor, {split.pre, perturb});
  b.add_gate(split.locked, GateKind::Xor, {flipped, restore});
  add_outputs(b, c, out_index, split.locked);
  return {b.build(), key, {LockScheme::Restore, key_size, seed}};
}

LockedDesign lock(const Circuit& c, const LockRecipe& recipe) {
  switch (recipe.scheme) {
    case LockScheme::Rll: return lock_rll(c, recipe.key_size, recipe.seed);
    case LockScheme::Chain: return lock_chain(c, recipe.key_size, recipe.seed);
    case LockScheme::Restore: return lock_restore(c, recipe.key_size, recipe.seed);
  }
  throw std::invalid_argument("unknown locking scheme");
}

std::string format_key(const std::vector<bool>& key) {
  std::string s(key.size(), '0');
  for (std::size_t i = 0; i < key.size(); ++i) s[key.size() - 1 - i] = key[i] ? '1' : '0';
  return s;
}

std::vector<bool> parse_key(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  if (text.empty()) throw std::invalid_argument("empty key");
  std::vector<bool> key(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[text.size() - 1 - i];
    if (ch != '0' && ch != '1') throw std::invalid_argument(std::string("invalid key character '") + ch + "'");
    key[i] = ch == '1';
  }
  return key;
}

std::vector<bool> read_key_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open key file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key(ss.str());
}

void write_key_file(const std::vector<bool>& key, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write key file " + path.string());
  out << format_key(key) << '\n';
}

std::string key_to_hex(const std::vector<bool>& key) {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t nibbles = std::max<std::size_t>(1, (key.size() + 3) / 4);
  std::string s(nibbles, '0');
  for (std::size_t n = 0; n < nibbles; ++n) {
    unsigned v = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t i = n * 4 + b;
      if (i < key.size() && key[i]) v |= 1U << b;
    }
    s[nibbles - 1 - n] = kDigits[v];
  }
  return s;
}

SimulatedChip activate(const LockedDesign& design) { return SimulatedChip(design.circuit, design.correct_key); }

}  // namespace afia
