// Stuck-at test generation for key inputs over (good, faulty) value pairs.
//
// Every net carries a good and a faulty component, each 0/1/X. The fault site
// is a key input whose faulty component is pinned to the stuck value; nets
// outside its fanout cone always have equal components.
//
// The search is PODEM-style: decisions are made only on primary inputs and
// free keys, and values reach internal nets by forward simulation alone, so
// internal nets never need justifying. Each step takes the lowest-numbered
// D-frontier gate that still has an X-path to an observed output, turns "get
// the fault effect through this gate" into a side-input objective, and
// backtraces that objective to an unassigned input. Every decision is a
// binary split on one input, so exhausting the tree proves the fault
// undetectable.

#include "search.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace afia::detail {

namespace {

using Cost = std::uint64_t;

constexpr Cost kCostCap = Cost{1} << 50;
// Free keys are expensive to control: every one the pattern fixes is a fault
// the attacker has to inject.
constexpr Cost kFreeKeyCost = 1'000'000;

Cost sat_add(Cost a, Cost b) { return std::min(kCostCap, a + b); }

struct Aborted {};

class Engine {
 public:
  Engine(const Circuit& c, std::size_t target_key, Polarity polarity, const KeyBits& constraints,
         const AtpgOptions& opts)
      : c_(c),
        site_(c.key_inputs()[target_key]),
        stuck_(to_logic3(stuck_value(polarity))),
        limit_(opts.backtrack_limit),
        good_(c.num_nets(), Logic3::X),
        bad_(c.num_nets(), Logic3::X),
        in_cone_(c.num_nets(), 0),
        queued_(c.num_gates(), 0),
        topo_pos_(c.num_gates(), 0),
        seen_(c.num_nets(), 0) {
    for (std::size_t i = 0; i < c.topo().size(); ++i) topo_pos_[c.topo()[i]] = static_cast<std::uint32_t>(i);
    mark_cone();
    compute_scoap(constraints, target_key);
    if (opts.observe_outputs.empty()) {
      observed_.assign(c.outputs().begin(), c.outputs().end());
    } else {
      for (std::size_t o : opts.observe_outputs) observed_.push_back(c.outputs()[o]);
    }
    is_observed_.assign(c.num_nets(), 0);
    for (NetId o : observed_) is_observed_[o] = 1;
    mark_useful();
    for (const auto& [k, v] : constraints) constraint_nets_.emplace_back(c.key_inputs()[k], to_logic3(v));
  }

  SearchResult run() {
    SearchResult res;
    good_[site_] = !stuck_;
    bad_[site_] = stuck_;
    schedule_fanout(site_);
    for (const auto& [net, v] : constraint_nets_) set_input(net, v);
    propagate();
    trail_.clear();
    if (useful_[site_]) {
      try {
        if (search()) res.status = AtpgStatus::Detected;
      } catch (const Aborted&) {
        res.status = AtpgStatus::Aborted;
      }
    }
    res.backtracks = backtracks_;
    if (res.status == AtpgStatus::Detected) {
      for (NetId n : c_.inputs()) res.pi.push_back(good_[n]);
      for (NetId n : c_.key_inputs()) res.keys.push_back(good_[n]);
    }
    return res;
  }

 private:
  struct Undo {
    NetId net;
    Logic3 good;
    Logic3 bad;
  };

  // ---- setup

  void mark_cone() {
    in_cone_[site_] = 1;
    for (auto gi : c_.topo()) {
      const Gate& g = c_.gates()[gi];
      for (NetId f : g.fanins) {
        if (in_cone_[f]) {
          in_cone_[g.out] = 1;
          break;
        }
      }
    }
    for (std::size_t gi = 0; gi < c_.num_gates(); ++gi)
      if (in_cone_[c_.gates()[gi].out]) cone_gates_.push_back(static_cast<std::uint32_t>(gi));
  }

  // Nets with a structural path to an observed output. Frontier gates
  // elsewhere cannot help.
  void mark_useful() {
    useful_ = is_observed_;
    const auto topo = c_.topo();
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      const Gate& g = c_.gates()[*it];
      if (!useful_[g.out]) continue;
      for (NetId f : g.fanins) useful_[f] = 1;
    }
  }

  void compute_scoap(const KeyBits& constraints, std::size_t target_key) {
    cc0_.assign(c_.num_nets(), 1);
    cc1_.assign(c_.num_nets(), 1);
    for (std::size_t k = 0; k < c_.num_keys(); ++k) {
      if (constraints.count(k) && k != target_key) continue;
      cc0_[c_.key_inputs()[k]] = cc1_[c_.key_inputs()[k]] = kFreeKeyCost;
    }
    for (auto gi : c_.topo()) {
      const Gate& g = c_.gates()[gi];
      Cost c0 = 0;
      Cost c1 = 0;
      auto sum = [&](const std::vector<Cost>& cc) {
        Cost s = 0;
        for (NetId f : g.fanins) s = sat_add(s, cc[f]);
        return s;
      };
      auto min_of = [&](const std::vector<Cost>& cc) {
        Cost m = kCostCap;
        for (NetId f : g.fanins) m = std::min(m, cc[f]);
        return m;
      };
      switch (g.kind) {
        case GateKind::And:
        case GateKind::Nand:
          c1 = sum(cc1_);
          c0 = min_of(cc0_);
          break;
        case GateKind::Or:
        case GateKind::Nor:
          c0 = sum(cc0_);
          c1 = min_of(cc1_);
          break;
        case GateKind::Xor:
        case GateKind::Xnor: {
          c0 = cc0_[g.fanins[0]];
          c1 = cc1_[g.fanins[0]];
          for (std::size_t i = 1; i < g.fanins.size(); ++i) {
            const Cost a0 = cc0_[g.fanins[i]];
            const Cost a1 = cc1_[g.fanins[i]];
            const Cost n0 = std::min(sat_add(c0, a0), sat_add(c1, a1));
            const Cost n1 = std::min(sat_add(c0, a1), sat_add(c1, a0));
            c0 = n0;
            c1 = n1;
          }
          break;
        }
        case GateKind::Not:
        case GateKind::Buf:
          c0 = cc0_[g.fanins[0]];
          c1 = cc1_[g.fanins[0]];
          break;
        case GateKind::Mux2: {
          const NetId s = g.fanins[0], a = g.fanins[1], b = g.fanins[2];
          c0 = std::min(sat_add(cc0_[s], cc0_[a]), sat_add(cc1_[s], cc0_[b]));
          c1 = std::min(sat_add(cc0_[s], cc1_[a]), sat_add(cc1_[s], cc1_[b]));
          break;
        }
      }
      if (g.kind == GateKind::Nand || g.kind == GateKind::Nor || g.kind == GateKind::Not ||
          g.kind == GateKind::Xnor)
        std::swap(c0, c1);
      cc0_[g.out] = sat_add(c0, 1);
      cc1_[g.out] = sat_add(c1, 1);
    }
  }

  Cost cost(NetId net, Logic3 v) const { return v == Logic3::One ? cc1_[net] : cc0_[net]; }

  // ---- values

  Logic3 comp(NetId net, int which) const { return which == 0 ? good_[net] : bad_[net]; }

  bool effect(NetId n) const { return is_known(good_[n]) && is_known(bad_[n]) && good_[n] != bad_[n]; }
  bool dead(NetId n) const { return is_known(good_[n]) && good_[n] == bad_[n]; }

  void set_input(NetId net, Logic3 v) {
    trail_.push_back({net, good_[net], bad_[net]});
    good_[net] = bad_[net] = v;
    schedule_fanout(net);
  }

  void schedule_fanout(NetId net) {
    for (auto gi : c_.fanouts(net)) {
      if (queued_[gi]) continue;
      queued_[gi] = 1;
      heap_.push(topo_pos_[gi]);
    }
  }

  // Event-driven forward simulation in topological order. Values only move
  // from X to known, so there is nothing to conflict with.
  void propagate() {
    while (!heap_.empty()) {
      const auto gi = c_.topo()[heap_.top()];
      heap_.pop();
      queued_[gi] = 0;
      const Gate& g = c_.gates()[gi];
      load_inputs(g, 0);
      const Logic3 ng = eval_gate(g.kind, in_);
      Logic3 nb = ng;
      if (in_cone_[g.out]) {
        load_inputs(g, 1);
        nb = eval_gate(g.kind, in_);
      }
      if (ng == good_[g.out] && nb == bad_[g.out]) continue;
      trail_.push_back({g.out, good_[g.out], bad_[g.out]});
      good_[g.out] = ng;
      bad_[g.out] = nb;
      schedule_fanout(g.out);
    }
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      const Undo& u = trail_.back();
      good_[u.net] = u.good;
      bad_[u.net] = u.bad;
      trail_.pop_back();
    }
  }

  void load_inputs(const Gate& g, int which) {
    in_.clear();
    for (NetId f : g.fanins) in_.push_back(comp(f, which));
  }

  // ---- search

  void count_backtrack() {
    if (++backtracks_ > limit_) throw Aborted{};
  }

  bool try_input(NetId net, Logic3 v) {
    const std::size_t mark = trail_.size();
    set_input(net, v);
    propagate();
    if (search()) return true;
    undo_to(mark);
    return false;
  }

  bool observed_effect() const {
    return std::any_of(observed_.begin(), observed_.end(), [&](NetId o) { return effect(o); });
  }

  bool search() {
    if (observed_effect()) return true;
    const auto gate = frontier_gate();
    if (!gate) return false;
    const auto [net, which, v] = propagation_objective(c_.gates()[*gate]);
    const auto [input, iv] = backtrace(net, which, v);
    if (try_input(input, iv)) return true;
    count_backtrack();
    if (try_input(input, !iv)) return true;
    count_backtrack();
    return false;
  }

  // Lowest-numbered gate with a fault effect on an input, an undecided
  // output, and a path of undecided nets to an observed output.
  std::optional<std::uint32_t> frontier_gate() {
    for (auto gi : cone_gates_) {
      const Gate& g = c_.gates()[gi];
      if (!useful_[g.out] || effect(g.out) || dead(g.out)) continue;
      if (!std::any_of(g.fanins.begin(), g.fanins.end(), [&](NetId f) { return effect(f); })) continue;
      if (x_path(g.out)) return gi;
    }
    return std::nullopt;
  }

  bool x_path(NetId from) {
    ++epoch_;
    work_.assign(1, from);
    seen_[from] = epoch_;
    for (std::size_t head = 0; head < work_.size(); ++head) {
      const NetId n = work_[head];
      if (is_observed_[n]) return true;
      for (auto gi : c_.fanouts(n)) {
        const NetId out = c_.gates()[gi].out;
        if (seen_[out] == epoch_ || dead(out) || !useful_[out]) continue;
        seen_[out] = epoch_;
        work_.push_back(out);
      }
    }
    return false;
  }

  struct Objective {
    NetId net;
    int which;
    Logic3 value;
  };

  // First component of `net` that is still X.
  int open_component(NetId net) const { return is_known(good_[net]) ? 1 : 0; }

  // Side-input value that lets the fault effect through `g`.
  Objective propagation_objective(const Gate& g) {
    switch (g.kind) {
      case GateKind::And:
      case GateKind::Nand:
      case GateKind::Or:
      case GateKind::Nor: {
        const Logic3 pass = (g.kind == GateKind::And || g.kind == GateKind::Nand) ? Logic3::One : Logic3::Zero;
        // Every side input must pass; start with the hardest.
        std::optional<NetId> pick;
        Cost worst = 0;
        for (NetId f : g.fanins) {
          if (effect(f) || (is_known(good_[f]) && is_known(bad_[f]))) continue;
          if (!pick || cost(f, pass) > worst) {
            pick = f;
            worst = cost(f, pass);
          }
        }
        if (pick) return {*pick, open_component(*pick), pass};
        break;
      }
      case GateKind::Xor:
      case GateKind::Xnor: {
        std::optional<NetId> pick;
        std::size_t open = 0;
        bool parity = is_inverting(g.kind);
        Cost best = 0;
        for (NetId f : g.fanins) {
          if (effect(f)) {
            parity ^= good_[f] == Logic3::One;
            continue;
          }
          if (is_known(good_[f]) && is_known(bad_[f])) {
            parity ^= good_[f] == Logic3::One;
            continue;
          }
          ++open;
          const Cost k = std::min(cc0_[f], cc1_[f]);
          if (!pick || k < best) {
            pick = f;
            best = k;
          }
        }
        if (!pick) break;
        if (open == 1 && !in_cone_[*pick]) {
          // Good output 1 (D) needs the side input at !parity. Prefer the
          // cheaper polarity, D on a tie.
          const Logic3 for_d = to_logic3(!parity);
          const Logic3 v = cost(*pick, for_d) <= cost(*pick, !for_d) ? for_d : !for_d;
          return {*pick, 0, v};
        }
        const Logic3 v = cc1_[*pick] < cc0_[*pick] ? Logic3::One : Logic3::Zero;
        return {*pick, open_component(*pick), v};
      }
      case GateKind::Mux2: {
        const NetId s = g.fanins[0], a = g.fanins[1], b = g.fanins[2];
        auto open = [&](NetId n) { return !is_known(good_[n]) || !is_known(bad_[n]); };
        if (open(s) && !effect(s)) {
          // Select the data input carrying the effect.
          const Logic3 v = effect(a) ? Logic3::Zero : effect(b) ? Logic3::One : Logic3::Zero;
          return {s, open_component(s), v};
        }
        // Effect on the select: the data inputs must differ.
        if (open(a) && !effect(a)) {
          const Logic3 v = is_known(good_[b]) ? !good_[b] : (cc1_[a] < cc0_[a] ? Logic3::One : Logic3::Zero);
          return {a, open_component(a), v};
        }
        if (open(b) && !effect(b)) {
          const Logic3 v = is_known(good_[a]) ? !good_[a] : (cc1_[b] < cc0_[b] ? Logic3::One : Logic3::Zero);
          return {b, open_component(b), v};
        }
        break;
      }
      case GateKind::Not:
      case GateKind::Buf: break;
    }
    // Fallback: any open input, cheaper value first.
    for (NetId f : g.fanins) {
      if (is_known(good_[f]) && is_known(bad_[f])) continue;
      return {f, open_component(f), cc1_[f] < cc0_[f] ? Logic3::One : Logic3::Zero};
    }
    return {g.fanins[0], 0, Logic3::Zero};
  }

  // Walks an objective back to an unassigned primary input or free key,
  // steering by controllability: the easiest input when one controlling
  // value suffices, the hardest when every input must be set.
  std::pair<NetId, Logic3> backtrace(NetId net, int which, Logic3 v) {
    while (c_.role(net) == NetRole::Gate) {
      const Gate& g = c_.gates()[*c_.driver(net)];
      load_inputs(g, which);
      const Logic3 base = is_inverting(g.kind) ? !v : v;
      std::size_t pick = 0;
      Logic3 want = base;
      switch (g.kind) {
        case GateKind::Buf:
        case GateKind::Not: break;
        case GateKind::And:
        case GateKind::Nand:
        case GateKind::Or:
        case GateKind::Nor: {
          const Logic3 ctrl = (g.kind == GateKind::And || g.kind == GateKind::Nand) ? Logic3::Zero : Logic3::One;
          const bool any = base == ctrl;
          Cost best = any ? std::numeric_limits<Cost>::max() : 0;
          bool found = false;
          for (std::size_t i = 0; i < g.fanins.size(); ++i) {
            if (is_known(in_[i])) continue;
            const Cost k = cost(g.fanins[i], any ? ctrl : !ctrl);
            if (!found || (any ? k < best : k > best)) {
              best = k;
              pick = i;
              found = true;
            }
          }
          want = any ? ctrl : !ctrl;
          break;
        }
        case GateKind::Xor:
        case GateKind::Xnor: {
          std::size_t open = 0;
          bool parity = false;
          Cost best = std::numeric_limits<Cost>::max();
          for (std::size_t i = 0; i < g.fanins.size(); ++i) {
            if (is_known(in_[i])) {
              parity ^= in_[i] == Logic3::One;
              continue;
            }
            ++open;
            const NetId f = g.fanins[i];
            const Cost k = std::min(cc0_[f], cc1_[f]);
            if (k < best) {
              best = k;
              pick = i;
            }
          }
          const NetId f = g.fanins[pick];
          if (open == 1) {
            want = to_logic3((base == Logic3::One) != parity);
          } else {
            want = cc1_[f] < cc0_[f] ? Logic3::One : Logic3::Zero;
          }
          break;
        }
        case GateKind::Mux2: {
          const Logic3 s = in_[0], a = in_[1], b = in_[2];
          if (is_known(s)) {
            pick = s == Logic3::One ? 2 : 1;
            want = v;
          } else if (is_known(a)) {
            pick = 0;
            want = a == v ? Logic3::Zero : Logic3::One;
          } else if (is_known(b)) {
            pick = 0;
            want = b == v ? Logic3::One : Logic3::Zero;
          } else {
            const Cost via0 = sat_add(cost(g.fanins[0], Logic3::Zero), cost(g.fanins[1], v));
            const Cost via1 = sat_add(cost(g.fanins[0], Logic3::One), cost(g.fanins[2], v));
            pick = 0;
            want = via1 < via0 ? Logic3::One : Logic3::Zero;
          }
          break;
        }
      }
      net = g.fanins[pick];
      v = want;
    }
    return {net, v};
  }

  const Circuit& c_;
  NetId site_;
  Logic3 stuck_;
  std::uint64_t limit_;
  std::uint64_t backtracks_ = 0;

  std::vector<Logic3> good_;
  std::vector<Logic3> bad_;
  std::vector<std::uint8_t> in_cone_;
  std::vector<std::uint32_t> cone_gates_;
  std::vector<NetId> observed_;
  std::vector<std::uint8_t> is_observed_;
  std::vector<std::uint8_t> useful_;
  std::vector<std::pair<NetId, Logic3>> constraint_nets_;
  std::vector<Cost> cc0_;
  std::vector<Cost> cc1_;

  std::vector<Undo> trail_;
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> heap_;
  std::vector<std::uint8_t> queued_;
  std::vector<std::uint32_t> topo_pos_;
  std::vector<Logic3> in_;
  std::vector<NetId> work_;
  std::vector<std::uint32_t> seen_;
  std::uint32_t epoch_ = 0;
};

}  // namespace

SearchResult run_search(const Circuit& c, std::size_t target_key, Polarity polarity, const KeyBits& constraints,
                        const AtpgOptions& opts) {
  return Engine(c, target_key, polarity, constraints, opts).run();
}

}  // namespace afia::detail
