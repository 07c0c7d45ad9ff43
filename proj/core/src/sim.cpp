#include "afia/sim.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace afia {

namespace {

void check_sizes(const Circuit& c, std::size_t pi, std::size_t key) {
  if (pi > c.num_inputs())
    throw std::invalid_argument("pattern has " + std::to_string(pi) + " inputs, circuit has " +
                                std::to_string(c.num_inputs()));
  if (key > c.num_keys())
    throw std::invalid_argument("pattern has " + std::to_string(key) + " key bits, circuit has " +
                                std::to_string(c.num_keys()));
}

std::vector<Logic3> seed_values(const Circuit& c, std::span<const Logic3> pi, std::span<const Logic3> key) {
  check_sizes(c, pi.size(), key.size());
  std::vector<Logic3> v(c.num_nets(), Logic3::X);
  for (std::size_t i = 0; i < pi.size(); ++i) v[c.inputs()[i]] = pi[i];
  for (std::size_t i = 0; i < key.size(); ++i) v[c.key_inputs()[i]] = key[i];
  return v;
}

void propagate(const Circuit& c, std::vector<Logic3>& v, std::optional<std::pair<NetId, Logic3>> forced) {
  if (forced) v[forced->first] = forced->second;
  std::vector<Logic3> in;
  for (auto gi : c.topo()) {
    const Gate& g = c.gates()[gi];
    if (forced && g.out == forced->first) continue;
    in.clear();
    for (NetId f : g.fanins) in.push_back(v[f]);
    v[g.out] = eval_gate(g.kind, in);
  }
}

std::vector<Logic3> outputs_of(const Circuit& c, const std::vector<Logic3>& v) {
  std::vector<Logic3> out;
  out.reserve(c.num_outputs());
  for (NetId o : c.outputs()) out.push_back(v[o]);
  return out;
}

}  // namespace

std::vector<Logic3> simulate_nets(const Circuit& c, std::span<const Logic3> pi, std::span<const Logic3> key,
                                  std::optional<std::pair<NetId, Logic3>> forced) {
  auto v = seed_values(c, pi, key);
  if (forced && forced->first >= c.num_nets()) throw std::invalid_argument("forced net out of range");
  propagate(c, v, forced);
  return v;
}

std::vector<Logic3> simulate(const Circuit& c, std::span<const Logic3> pi, std::span<const Logic3> key) {
  return outputs_of(c, simulate_nets(c, pi, key));
}

std::vector<Logic3> simulate(const Circuit& c, const std::map<std::string, Logic3>& assignment) {
  std::vector<Logic3> pi(c.num_inputs(), Logic3::X);
  std::vector<Logic3> key(c.num_keys(), Logic3::X);
  for (const auto& [name, value] : assignment) {
    const auto net = c.find_net(name);
    if (!net) throw std::invalid_argument("unknown net '" + name + "'");
    switch (c.role(*net)) {
      case NetRole::Input: pi[*net] = value; break;
      case NetRole::Key: key[*c.key_index(*net)] = value; break;
      case NetRole::Gate: throw std::invalid_argument("net '" + name + "' is not an input");
    }
  }
  return simulate(c, pi, key);
}

std::vector<Logic5> simulate_faulty(const Circuit& c, std::span<const Logic3> pi, std::span<const Logic3> key,
                                    Fault fault) {
  if (fault.net >= c.num_nets()) throw std::invalid_argument("fault net out of range");
  const auto good = simulate_nets(c, pi, key);
  const auto bad = simulate_nets(c, pi, key, std::pair{fault.net, to_logic3(stuck_value(fault.polarity))});
  std::vector<Logic5> out;
  out.reserve(c.num_outputs());
  for (NetId o : c.outputs()) out.push_back(compose(good[o], bad[o]));
  return out;
}

std::vector<std::uint64_t> simulate_words(const Circuit& c, std::span<const std::uint64_t> pi_words,
                                          std::span<const std::uint64_t> key_words) {
  if (pi_words.size() != c.num_inputs() || key_words.size() != c.num_keys())
    throw std::invalid_argument("word simulation needs one word per input and key");
  std::vector<std::uint64_t> v(c.num_nets(), 0);
  for (std::size_t i = 0; i < pi_words.size(); ++i) v[c.inputs()[i]] = pi_words[i];
  for (std::size_t i = 0; i < key_words.size(); ++i) v[c.key_inputs()[i]] = key_words[i];
  std::vector<std::uint64_t> in;
  for (auto gi : c.topo()) {
    const Gate& g = c.gates()[gi];
    in.clear();
    for (NetId f : g.fanins) in.push_back(v[f]);
    v[g.out] = eval_gate_words(g.kind, in);
  }
  std::vector<std::uint64_t> out;
  out.reserve(c.num_outputs());
  for (NetId o : c.outputs()) out.push_back(v[o]);
  return out;
}

std::vector<std::uint64_t> broadcast_key(const std::vector<bool>& key) {
  std::vector<std::uint64_t> w(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) w[i] = key[i] ? ~std::uint64_t{0} : 0;
  return w;
}

EquivalenceResult check_equivalence(const Circuit& a, const std::vector<bool>& key_a, const Circuit& b,
                                    const std::vector<bool>& key_b, const EquivalenceOptions& opts) {
  if (a.num_inputs() != b.num_inputs() || a.num_outputs() != b.num_outputs())
    throw std::invalid_argument("equivalence check needs matching input and output counts");
  if (key_a.size() != a.num_keys() || key_b.size() != b.num_keys())
    throw std::invalid_argument("key length does not match key inputs");

  const std::size_t n = a.num_inputs();
  const auto ka = broadcast_key(key_a);
  const auto kb = broadcast_key(key_b);
  EquivalenceResult res;
  res.exhaustive = n <= opts.exhaustive_limit;

  std::vector<std::uint64_t> words(n);
  auto compare = [&](std::uint64_t lanes_valid) -> bool {
    const auto oa = simulate_words(a, words, ka);
    const auto ob = simulate_words(b, words, kb);
    std::uint64_t diff = 0;
    for (std::size_t o = 0; o < oa.size(); ++o) diff |= oa[o] ^ ob[o];
    diff &= lanes_valid;
    if (!diff) return true;
    const int lane = __builtin_ctzll(diff);
    std::vector<bool> cex(n);
    for (std::size_t i = 0; i < n; ++i) cex[i] = (words[i] >> lane) & 1U;
    res.equivalent = false;
    res.counterexample = std::move(cex);
    return false;
  };

  if (res.exhaustive) {
    static constexpr std::uint64_t kLaneMasks[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL,
                                                    0xF0F0F0F0F0F0F0F0ULL, 0xFF00FF00FF00FF00ULL,
                                                    0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
    const std::uint64_t total = std::uint64_t{1} << n;
    const std::uint64_t blocks = total <= 64 ? 1 : total / 64;
    const std::uint64_t valid = total >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << total) - 1);
    for (std::uint64_t blk = 0; blk < blocks; ++blk) {
      for (std::size_t i = 0; i < n; ++i)
        words[i] = i < 6 ? kLaneMasks[i] : (((blk >> (i - 6)) & 1U) ? ~std::uint64_t{0} : 0);
      res.vectors += std::min<std::uint64_t>(64, total);
      if (!compare(valid)) return res;
    }
    return res;
  }

  std::mt19937_64 rng(opts.seed);
  std::size_t remaining = opts.samples;
  while (remaining > 0) {
    const std::size_t lanes = std::min<std::size_t>(64, remaining);
    for (auto& w : words) w = rng();
    const std::uint64_t valid = lanes == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << lanes) - 1);
    res.vectors += lanes;
    remaining -= lanes;
    if (!compare(valid)) return res;
  }
  return res;
}

}  // namespace afia
