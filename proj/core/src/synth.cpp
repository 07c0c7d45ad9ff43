#include "afia/synth.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "afia/sim.hpp"

namespace afia {

namespace {

constexpr GateKind kMonotoneKinds[] = {GateKind::And, GateKind::Nand, GateKind::Nand, GateKind::Or, GateKind::Nor};

struct Cluster {
  std::vector<std::string> pool;
  std::vector<std::string> unused;
};

class Grower {
 public:
  Grower(const SynthParams& p, std::uint64_t seed) : p_(p), rng_(seed), b_(p.name) {}

  Circuit run() {
    const std::size_t n_clusters = std::max<std::size_t>(1, p_.outputs);
    clusters_.resize(n_clusters);

    for (std::size_t i = 0; i < p_.inputs; ++i) {
      const auto name = "x" + std::to_string(i);
      b_.add_input(name);
      all_.push_back(name);
    }
    for (std::size_t c = 0; c < n_clusters; ++c) {
      for (std::size_t i = c; i < p_.inputs; i += n_clusters) seed_net(clusters_[c], all_[i]);
      if (p_.inputs < n_clusters) seed_net(clusters_[c], all_[c % p_.inputs]);
    }
    for (std::size_t k = 0; k < p_.keys; ++k) {
      const auto name = "keyinput" + std::to_string(k);
      b_.add_key_input(name);
      all_.push_back(name);
      seed_net(clusters_[draw_below(rng_, n_clusters)], name);
    }

    for (std::size_t c = 0; c < n_clusters; ++c) grow(c);
    return b_.build();
  }

 private:
  static void seed_net(Cluster& cl, const std::string& net) {
    if (std::find(cl.pool.begin(), cl.pool.end(), net) != cl.pool.end()) return;
    cl.pool.push_back(net);
    cl.unused.push_back(net);
  }

  bool chance(double prob) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < prob; }

  std::string take_unused(Cluster& cl) {
    const std::size_t i = draw_below(rng_, cl.unused.size());
    auto net = cl.unused[i];
    cl.unused.erase(cl.unused.begin() + static_cast<std::ptrdiff_t>(i));
    return net;
  }

  void mark_used(Cluster& cl, const std::string& net) {
    const auto it = std::find(cl.unused.begin(), cl.unused.end(), net);
    if (it != cl.unused.end()) cl.unused.erase(it);
  }

  std::string any_net(Cluster& cl) {
    if (!all_.empty() && chance(p_.cross_fanin)) return all_[draw_below(rng_, all_.size())];
    return cl.pool[draw_below(rng_, cl.pool.size())];
  }

  GateKind multi_input_kind() {
    if (chance(p_.xor_share)) return chance(0.5) ? GateKind::Xor : GateKind::Xnor;
    return kMonotoneKinds[draw_below(rng_, std::size(kMonotoneKinds))];
  }

  std::pair<GateKind, std::size_t> random_shape() {
    const std::uint64_t r = draw_below(rng_, 100);
    if (r < 10) return {r < 8 ? GateKind::Not : GateKind::Buf, 1};
    if (p_.allow_mux && r < 15) return {GateKind::Mux2, 3};
    const GateKind kind = multi_input_kind();
    // Mostly two inputs, occasionally up to max_fanin.
    const std::size_t max_fanin = std::max<std::size_t>(2, p_.max_fanin);
    const std::size_t arity = chance(0.7) ? 2 : 2 + draw_below(rng_, max_fanin - 1);
    return {kind, arity};
  }

  std::string emit(Cluster& cl, const std::string& out, GateKind kind, std::vector<std::string> fanins) {
    b_.add_gate(out, kind, std::move(fanins));
    cl.pool.push_back(out);
    cl.unused.push_back(out);
    all_.push_back(out);
    return out;
  }

  void grow(std::size_t c) {
    Cluster& cl = clusters_[c];
    const auto stem = "g" + std::to_string(c) + "_";
    std::size_t made = 0;
    const std::size_t body = p_.gates_per_output > 0 ? p_.gates_per_output - 1 : 0;

    for (; made < body; ++made) {
      auto [kind, arity] = random_shape();
      std::vector<std::string> fanins;
      for (std::size_t tries = 0; fanins.size() < arity && tries < 8 * arity; ++tries) {
        auto net = !cl.unused.empty() && fanins.empty() ? take_unused(cl) : any_net(cl);
        if (std::find(fanins.begin(), fanins.end(), net) != fanins.end()) continue;
        mark_used(cl, net);
        fanins.push_back(std::move(net));
      }
      if (fanins.size() < arity) {
        if (fanins.size() < 2 && arity > 1) continue;
        if (kind == GateKind::Mux2) kind = GateKind::And;
      }
      emit(cl, stem + std::to_string(made), kind, std::move(fanins));
    }

    // Fold whatever nobody reads into the output gate, through intermediate
    // gates if there is too much of it.
    const std::size_t width = std::max<std::size_t>(2, p_.max_fanin);
    while (cl.unused.size() > width) {
      std::vector<std::string> chunk;
      while (chunk.size() < width) chunk.push_back(take_unused(cl));
      emit(cl, stem + std::to_string(made++), multi_input_kind(), std::move(chunk));
    }
    std::vector<std::string> last;
    while (!cl.unused.empty()) last.push_back(take_unused(cl));
    for (int tries = 0; last.size() < 2 && tries < 32; ++tries) {
      auto net = any_net(cl);
      if (std::find(last.begin(), last.end(), net) == last.end()) last.push_back(std::move(net));
    }
    const auto out = "y" + std::to_string(c);
    if (last.size() == 1) {
      emit(cl, out, GateKind::Buf, std::move(last));
    } else {
      emit(cl, out, multi_input_kind(), std::move(last));
    }
    mark_used(cl, out);
    b_.add_output(out);
  }

  SynthParams p_;
  std::mt19937_64 rng_;
  CircuitBuilder b_;
  std::vector<Cluster> clusters_;
  std::vector<std::string> all_;
};

}  // namespace

Circuit random_circuit(const SynthParams& params, std::uint64_t seed) {
  if (params.inputs == 0) throw std::invalid_argument("random circuit needs at least one input");
  return Grower(params, seed).run();
}

}  // namespace afia
