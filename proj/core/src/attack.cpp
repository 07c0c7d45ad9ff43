#include "afia/attack.hpp"

#include <chrono>
#include <random>

#include "afia/cone.hpp"
#include "afia/sim.hpp"

namespace afia {

namespace {

std::string describe(const std::vector<std::pair<std::string, AtpgStatus>>& tries) {
  std::string s;
  for (const auto& [what, st] : tries) {
    if (!s.empty()) s += ", ";
    s += what + ": " + std::string(status_name(st));
  }
  return s;
}

std::vector<bool> fill_zero(const std::vector<Logic3>& pi) {
  std::vector<bool> out(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out[i] = pi[i] == Logic3::One;
  return out;
}

// Every determinate output must agree with the machine the decision picked.
void check_consistent(std::size_t key, const TestPattern& p, const std::vector<bool>& response, bool faulty) {
  const auto& expected = faulty ? p.expected_faulty : p.expected_good;
  for (std::size_t o = 0; o < expected.size() && o < response.size(); ++o) {
    if (!is_known(expected[o])) continue;
    if ((expected[o] == Logic3::One) != response[o])
      throw OracleInconsistency(key, "output " + std::to_string(o) + " answered " + (response[o] ? "1" : "0") +
                                         ", netlist predicts " + to_char(expected[o]));
  }
}

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void finish(AttackResult& r, const Circuit& c, Oracle& oracle, const AttackConfig& cfg, std::uint64_t queries0,
            std::uint64_t faults0, const Clock& clock) {
  r.total_injected_faults = oracle.injected_fault_count() - faults0;
  r.oracle_queries = oracle.query_count() - queries0;
  if (cfg.verify) r.verification = verify_key(c, r.recovered_key, oracle, cfg.verification);
  r.seconds = clock.seconds();
}

}  // namespace

std::string_view method_name(AttackMethod m) noexcept { return m == AttackMethod::Afia ? "afia" : "dfa"; }

UnresolvableKey::UnresolvableKey(std::size_t key, const std::string& detail)
    : std::runtime_error("key " + std::to_string(key) + " is unresolvable (" + detail + ")"), key_(key) {}

OracleInconsistency::OracleInconsistency(std::size_t key, const std::string& detail)
    : std::runtime_error("oracle inconsistent while deciding key " + std::to_string(key) + ": " + detail),
      key_(key) {}

bool decide_key_bit(bool observed, Logic3 expected_good, Logic3 expected_faulty, Polarity polarity) {
  if (!is_known(expected_good) || !is_known(expected_faulty) || expected_good == expected_faulty)
    throw OracleInconsistency(0, "predictions do not separate the fault-free and faulty chip");
  const bool stuck = stuck_value(polarity);
  if (to_logic3(observed) == expected_faulty) return stuck;
  if (to_logic3(observed) == expected_good) return !stuck;
  throw OracleInconsistency(0, "response matches neither prediction");
}

bool decide_key_bit(bool observed, bool expected_good, Polarity polarity) {
  return decide_key_bit(observed, to_logic3(expected_good), to_logic3(!expected_good), polarity);
}

VerifyOutcome verify_key(const Circuit& c, const std::vector<bool>& key, Oracle& oracle, const VerifyOptions& opts) {
  if (key.size() != c.num_keys()) throw std::invalid_argument("recovered key has the wrong length");
  const std::size_t n = c.num_inputs();
  const auto kw = broadcast_key(key);
  VerifyOutcome out;
  out.exhaustive = n <= opts.exhaustive_limit;
  std::vector<std::uint64_t> words(n);

  auto block = [&](std::uint64_t valid) {
    const auto expect = simulate_words(c, words, kw);
    const auto got = oracle.respond_words(words);
    std::uint64_t diff = 0;
    for (std::size_t o = 0; o < expect.size(); ++o) diff |= expect[o] ^ got[o];
    return (diff & valid) == 0;
  };

  if (out.exhaustive) {
    static constexpr std::uint64_t kMasks[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
                                                0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
    const std::uint64_t total = std::uint64_t{1} << n;
    const std::uint64_t blocks = total <= 64 ? 1 : total / 64;
    const std::uint64_t valid = total >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << total) - 1;
    for (std::uint64_t b = 0; b < blocks; ++b) {
      for (std::size_t i = 0; i < n; ++i)
        words[i] = i < 6 ? kMasks[i] : (((b >> (i - 6)) & 1U) ? ~std::uint64_t{0} : 0);
      out.vectors += std::min<std::uint64_t>(total, 64);
      if (!block(valid)) return out;
    }
    out.equivalent = true;
    return out;
  }

  std::mt19937_64 rng(opts.seed);
  for (std::size_t left = opts.samples; left > 0;) {
    const std::size_t lanes = std::min<std::size_t>(64, left);
    for (auto& w : words) w = rng();
    out.vectors += lanes;
    left -= lanes;
    if (!block(lanes == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << lanes) - 1)) return out;
  }
  out.equivalent = true;
  return out;
}

AttackResult run_afia(const Circuit& locked, Oracle& oracle, const AttackConfig& cfg) {
  const Clock clock;
  const std::uint64_t queries0 = oracle.query_count();
  const std::uint64_t faults0 = oracle.injected_fault_count();
  const std::size_t K = locked.num_keys();

  AttackResult r;
  r.method = AttackMethod::Afia;
  r.recovered_key.assign(K, false);
  const auto cones = extract_cones(locked);
  auto matrix = build_assoc_matrix(cones, K);
  std::vector<bool> known(K, false);

  while (const auto sel = matrix.cone_with_min_unknown_keys()) {
    const auto& cone = cones.cones[sel->cone];
    for (std::size_t key : sel->unknown_keys) {
      KeyBits in_cone;
      for (std::size_t k : cone.keys)
        if (known[k]) in_cone[k] = r.recovered_key[k];
      KeyBits everywhere;
      for (std::size_t k = 0; k < K; ++k)
        if (known[k]) everywhere[k] = r.recovered_key[k];

      const KeyBits nothing;
      AtpgOptions restricted = cfg.atpg;
      restricted.observe_outputs = {sel->cone};
      AtpgOptions open = cfg.atpg;
      open.observe_outputs.clear();

      struct Attempt {
        const char* label;
        Polarity polarity;
        const KeyBits* constraints;
        const AtpgOptions* opts;
        bool restricted;
      };
      const Attempt attempts[] = {{"sa1 in cone", Polarity::SA1, &in_cone, &restricted, true},
                                  {"sa0 in cone", Polarity::SA0, &in_cone, &restricted, true},
                                  {"sa1 any output", Polarity::SA1, &everywhere, &open, false},
                                  {"sa0 any output", Polarity::SA0, &everywhere, &open, false},
                                  // Under some programmed keys the known bits mask this one
                                  // everywhere; then they have to be forced as well.
                                  {"sa1 keys free", Polarity::SA1, &nothing, &open, false},
                                  {"sa0 keys free", Polarity::SA0, &nothing, &open, false}};
      std::vector<std::pair<std::string, AtpgStatus>> tried;
      std::optional<TestPattern> pattern;
      bool restricted_hit = true;
      for (const auto& a : attempts) {
        auto outcome = generate_pattern(locked, key, a.polarity, *a.constraints, *a.opts);
        r.atpg_backtracks += outcome.backtracks;
        tried.emplace_back(a.label, outcome.status);
        if (outcome.pattern) {
          pattern = std::move(outcome.pattern);
          restricted_hit = a.restricted;
          break;
        }
      }
      if (!pattern) throw UnresolvableKey(key, describe(tried));

      const auto response = oracle.respond(fill_zero(pattern->pi_values), pattern->key_values);
      const std::size_t po = pattern->detect_po;
      bool bit = false;
      try {
        bit = decide_key_bit(response[po], pattern->good_at_po(), pattern->faulty_at_po(), pattern->polarity);
      } catch (const OracleInconsistency& e) {
        throw OracleInconsistency(key, e.what());
      }
      const bool faulty = bit == stuck_value(pattern->polarity);
      check_consistent(key, *pattern, response, faulty);

      r.recovered_key[key] = bit;
      known[key] = true;
      matrix.mark_solved(key);
      BitRecord rec;
      rec.key = key;
      rec.pattern_id = r.patterns.size();
      rec.injections = pattern->key_values.size();
      rec.value = bit;
      rec.basis = faulty ? "faulty-response" : "fault-free-response";
      rec.cone = sel->cone;
      rec.cone_restricted = restricted_hit;
      r.per_bit.push_back(std::move(rec));
      r.patterns.push_back(std::move(*pattern));
      ++r.pattern_count;
    }
  }

  for (std::size_t key : matrix.orphan_keys()) {
    r.anomalies.push_back(key);
    matrix.mark_solved(key);
    BitRecord rec;
    rec.key = key;
    rec.basis = "orphan";
    r.per_bit.push_back(std::move(rec));
  }
  finish(r, locked, oracle, cfg, queries0, faults0, clock);
  return r;
}

AttackResult run_dfa(const Circuit& locked, Oracle& oracle, const AttackConfig& cfg) {
  const Clock clock;
  const std::uint64_t queries0 = oracle.query_count();
  const std::uint64_t faults0 = oracle.injected_fault_count();
  const std::size_t K = locked.num_keys();

  AttackResult r;
  r.method = AttackMethod::Dfa;
  r.recovered_key.assign(K, false);
  AtpgOptions opts = cfg.atpg;
  opts.observe_outputs.clear();

  for (std::size_t key = 0; key < K; ++key) {
    std::vector<std::pair<std::string, AtpgStatus>> tried;
    std::optional<TestPattern> pattern;
    for (Polarity pol : {Polarity::SA1, Polarity::SA0}) {
      KeyBits others;
      for (std::size_t j = 0; j < K; ++j)
        if (j != key) others[j] = stuck_value(pol);
      auto outcome = generate_pattern(locked, key, pol, others, opts);
      r.atpg_backtracks += outcome.backtracks;
      tried.emplace_back(pol == Polarity::SA1 ? "sa1" : "sa0", outcome.status);
      if (outcome.pattern) {
        pattern = std::move(outcome.pattern);
        break;
      }
    }
    // Some locks mask a key whenever all the others share one value. Let the
    // pattern pick the other keys instead; they are all forced either way, so
    // the cost is unchanged.
    for (Polarity pol : {Polarity::SA1, Polarity::SA0}) {
      if (pattern) break;
      auto outcome = generate_pattern(locked, key, pol, {}, opts);
      r.atpg_backtracks += outcome.backtracks;
      tried.emplace_back(pol == Polarity::SA1 ? "sa1 mixed keys" : "sa0 mixed keys", outcome.status);
      if (!outcome.pattern) continue;
      pattern = std::move(outcome.pattern);
      for (std::size_t j = 0; j < K; ++j)
        if (j != key) pattern->constraints[j] = stuck_value(pol);
      for (const auto& [j, b] : pattern->key_values) pattern->constraints[j] = b;
      pattern->key_values.clear();
    }
    if (!pattern) throw UnresolvableKey(key, describe(tried));

    const bool v = stuck_value(pattern->polarity);
    const auto pi = fill_zero(pattern->pi_values);
    // Every other key is forced to the value the pattern was built for.
    KeyBits partial = pattern->constraints;
    KeyBits full = partial;
    full[key] = v;
    const auto ra = oracle.respond(pi, partial);
    const auto rf = oracle.respond(pi, full);
    check_consistent(key, *pattern, rf, true);
    const std::size_t po = pattern->detect_po;
    const bool equal = ra[po] == rf[po];
    const bool bit = equal ? v : !v;
    check_consistent(key, *pattern, ra, equal);

    r.recovered_key[key] = bit;
    BitRecord rec;
    rec.key = key;
    rec.pattern_id = r.patterns.size();
    rec.injections = partial.size() + full.size();
    rec.value = bit;
    rec.basis = equal ? "responses-equal" : "responses-differ";
    rec.cone_restricted = false;
    r.per_bit.push_back(std::move(rec));
    r.patterns.push_back(std::move(*pattern));
    ++r.pattern_count;
  }
  finish(r, locked, oracle, cfg, queries0, faults0, clock);
  return r;
}

AttackResult run_attack(AttackMethod method, const Circuit& locked, Oracle& oracle, const AttackConfig& cfg) {
  return method == AttackMethod::Afia ? run_afia(locked, oracle, cfg) : run_dfa(locked, oracle, cfg);
}

Accounting account(const AttackResult& r) {
  Accounting a;
  a.method = r.method;
  a.key_size = r.recovered_key.size();
  a.total_faults = r.total_injected_faults;
  a.faults_per_key = a.key_size ? static_cast<double>(a.total_faults) / static_cast<double>(a.key_size) : 0.0;
  a.pattern_count = r.pattern_count;
  a.pattern_bound_ok = r.pattern_count <= a.key_size;
  const std::uint64_t K = a.key_size;
  if (r.method == AttackMethod::Afia) {
    a.fault_bound = K * (K ? K - 1 : 0) / 2;
    a.fault_bound_ok = a.total_faults <= a.fault_bound;
  } else {
    a.fault_bound = 2 * K * K - K;
    a.fault_bound_ok = a.total_faults == a.fault_bound;
  }
  std::uint64_t sum = 0;
  for (const auto& b : r.per_bit) sum += b.injections;
  a.ledger_consistent = sum == r.total_injected_faults;
  return a;
}

}  // namespace afia
