// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are exact unless stated on the line.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "afia/attack.hpp"
#include "afia/atpg.hpp"
#include "afia/cone.hpp"
#include "afia/locking.hpp"
#include "afia/synth.hpp"
#include "support.hpp"

using namespace afia;

namespace {

constexpr std::size_t kKeySizes[] = {8, 16, 32, 64, 128};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      if (pass) detail << " | first failure: " << why;
      pass = false;
    }
  }
};

int failures = 0;

void report(int n, Verdict& v, double seconds) {
  if (!v.pass) ++failures;
  char t[32];
  std::snprintf(t, sizeof t, " (%.1fs)", seconds);
  std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << " " << v.detail.str() << t << std::endl;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Every pattern produced anywhere in this run, for the soundness criterion.
std::size_t patterns_seen = 0;
std::size_t patterns_rejected = 0;

void audit_patterns(const Circuit& c, const AttackResult& r) {
  for (const auto& p : r.patterns) {
    ++patterns_seen;
    if (!verify_pattern(c, p)) ++patterns_rejected;
  }
}

AttackResult attack(AttackMethod m, const Circuit& c, const std::vector<bool>& hidden) {
  SimulatedChip chip(c, hidden);
  auto r = run_attack(m, c, chip);
  audit_patterns(c, r);
  return r;
}

Circuit wide_base() {
  // Enough primary inputs for a 128-bit restoration unit.
  SynthParams p;
  p.name = "wide140";
  p.inputs = 140;
  p.outputs = 24;
  p.gates_per_output = 30;
  p.cross_fanin = 0.15;
  return random_circuit(p, 1);
}

// Holds the criterion 3 runs for criterion 4.
struct RunRecord {
  std::size_t key_size;
  std::size_t afia_patterns;
};
std::vector<RunRecord> randomized_runs;
std::vector<RunRecord> dependent_runs;

void criterion1(const Circuit& c880) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  v.detail << "DFA F_T on c880 RLL:";
  for (std::size_t K : kKeySizes) {
    const auto d = lock_rll(c880, K, K);
    const auto r = attack(AttackMethod::Dfa, d.circuit, d.correct_key);
    v.detail << " K=" << K << "->" << r.total_injected_faults;
    v.require(r.total_injected_faults == 2 * K * K - K, "K=" + std::to_string(K) + " expected " + std::to_string(2 * K * K - K));
    v.require(r.recovered_key == d.correct_key, "K=" + std::to_string(K) + " wrong key");
  }
  report(1, v, since(t0));
}

void criterion2(const Circuit& wide) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  v.detail << "AFIA F_T on " << wide.name() << ":";
  for (LockScheme s : {LockScheme::Restore, LockScheme::Chain}) {
    v.detail << " " << scheme_name(s);
    for (std::size_t K : kKeySizes) {
      const auto d = lock(wide, {s, K, 100 + K});
      const auto t1 = std::chrono::steady_clock::now();
      const auto r = attack(AttackMethod::Afia, d.circuit, d.correct_key);
      const double secs = since(t1);
      const std::uint64_t want = K * (K - 1) / 2;
      v.detail << (K == 8 ? " " : ",") << r.total_injected_faults;
      const std::string tag = std::string(scheme_name(s)) + " K=" + std::to_string(K);
      v.require(r.total_injected_faults == want, tag + " expected " + std::to_string(want));
      v.require(r.recovered_key == d.correct_key, tag + " wrong key");
      v.require(secs <= 600, tag + " took longer than 10 min");
      dependent_runs.push_back({K, r.pattern_count});
    }
  }
  report(2, v, since(t0));
}

void criterion3(const Circuit& c432, const Circuit& c880) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  std::mt19937_64 rng(2024);
  std::size_t runs = 0, exact = 0, exhaustive = 0;
  struct Base {
    std::string label;
    std::vector<std::size_t> key_sizes;
  };
  const Base bases[] = {{"c17-scale", {1, 2, 3, 4}}, {"c432", {8, 16, 32}}, {"c880", {16, 32, 64}}};
  for (const auto& b : bases) {
    for (LockScheme s : {LockScheme::Rll, LockScheme::Chain, LockScheme::Restore}) {
      for (std::uint64_t seed = 0; seed < 24; ++seed) {
        Circuit base;
        if (b.label == "c432") {
          base = c432;
        } else if (b.label == "c880") {
          base = c880;
        } else {
          SynthParams p;
          p.name = "small";
          p.inputs = 5;
          p.outputs = 2;
          p.gates_per_output = 4 + seed % 3;
          p.xor_share = 0.3;
          base = random_circuit(p, seed);
        }
        std::size_t K = b.key_sizes[seed % b.key_sizes.size()];
        // A restoration unit compares one primary input per key bit.
        if (s == LockScheme::Restore) K = std::min(K, base.num_inputs());
        const auto d = lock(base, {s, K, seed});
        const auto hidden = ref::bits(rng(), K);
        ++runs;
        const std::string tag = b.label + "/" + std::string(scheme_name(s)) + "/seed" + std::to_string(seed);
        try {
          const auto a = attack(AttackMethod::Afia, d.circuit, hidden);
          const auto f = attack(AttackMethod::Dfa, d.circuit, hidden);
          const bool ok = a.recovered_key == hidden && f.recovered_key == hidden && a.verification &&
                          a.verification->equivalent && f.verification && f.verification->equivalent;
          v.require(ok, tag + " key mismatch");
          if (ok) ++exact;
          if (a.verification && a.verification->exhaustive) ++exhaustive;
          randomized_runs.push_back({K, a.pattern_count});
        } catch (const std::exception& e) {
          v.require(false, tag + " threw: " + e.what());
        }
      }
    }
  }
  v.require(runs >= 200, "fewer than 200 runs");
  v.detail << exact << "/" << runs << " runs recovered the exact key with both methods (" << exhaustive
           << " verified exhaustively, rest on 10^4 samples)";
  report(3, v, since(t0));
}

void criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  std::size_t within = 0;
  for (const auto& r : randomized_runs)
    if (r.afia_patterns <= r.key_size) ++within;
  std::size_t tight = 0;
  for (const auto& r : dependent_runs)
    if (r.afia_patterns == r.key_size) ++tight;
  v.require(!randomized_runs.empty() && within == randomized_runs.size(), "pattern_count > K on a randomized run");
  v.require(!dependent_runs.empty() && tight == dependent_runs.size(), "pattern_count != K on a dependent lock");
  v.detail << "pattern_count <= K on " << within << "/" << randomized_runs.size()
           << " randomized runs, = K on " << tight << "/" << dependent_runs.size() << " dependent locks";
  report(4, v, since(t0));
}

std::string pi_string(const TestPattern& p) {
  std::string s;
  for (Logic3 x : p.pi_values) s += to_char(x);
  return s;
}

void criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  const Circuit c = read_bench_file(ref::fixture("example.bench"));

  const auto p0 = generate_pattern(c, 2, Polarity::SA1, {}, {.observe_outputs = {1}});
  v.require(p0.pattern.has_value(), "no pattern for sa1@k2");
  if (p0.pattern) {
    v.detail << "sa1@k2 pi=" << pi_string(*p0.pattern);
    v.require(pi_string(*p0.pattern) == "XXXXX0", "sa1@k2 pattern differs");
    v.require(p0.pattern->key_values.empty(), "sa1@k2 injects faults");
    v.require(verify_pattern(c, *p0.pattern), "sa1@k2 pattern does not verify");
  }

  // k0 is solved in the first cone before k1 is known.
  const auto p1 = generate_pattern(c, 0, Polarity::SA1, {}, {.observe_outputs = {0}});
  v.require(p1.pattern.has_value(), "no pattern for sa1@k0");
  if (p1.pattern) {
    v.detail << "; sa1@k0 pi=" << pi_string(*p1.pattern) << " injections=";
    for (const auto& [k, b] : p1.pattern->key_values) v.detail << "k" << k << "=" << b;
    v.require(p1.pattern->key_values == KeyBits{{1, true}}, "sa1@k0 should inject only k1=1");
    v.require(pi_string(*p1.pattern) == "0X0X0X", "sa1@k0 pattern differs from the canonical one");
    v.require(verify_pattern(c, *p1.pattern), "sa1@k0 pattern does not verify");
  }

  const auto m = build_assoc_matrix(extract_cones(c));
  std::vector<std::vector<int>> got;
  for (std::size_t k = 0; k < m.num_keys(); ++k) {
    got.emplace_back();
    for (std::size_t o = 0; o < m.num_cones(); ++o) got.back().push_back(m.at(k, o) ? 1 : 0);
  }
  const std::vector<std::vector<int>> want{{1, 0}, {1, 0}, {0, 1}};
  v.detail << "; matrix=[";
  for (std::size_t k = 0; k < got.size(); ++k) {
    v.detail << (k ? "," : "") << "[";
    for (std::size_t o = 0; o < got[k].size(); ++o) v.detail << (o ? "," : "") << got[k][o];
    v.detail << "]";
  }
  v.detail << "]";
  v.require(got == want, "association matrix differs");
  report(5, v, since(t0));
}

void criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;

  // Extra soundness sweep over constrained requests on locked ISCAS circuits.
  std::mt19937_64 rng(6);
  const Circuit c432 = read_bench_file(ref::data_dir() / "c432.bench");
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto d = lock(c432, {static_cast<LockScheme>(seed % 3), 24, seed});
    for (std::size_t t = 0; t < 24; ++t) {
      KeyBits constraints;
      for (std::size_t j = 0; j < 24; ++j)
        if (j != t && rng() % 2) constraints[j] = d.correct_key[j];
      const auto r = generate_pattern(d.circuit, t, rng() % 2 ? Polarity::SA1 : Polarity::SA0, constraints);
      if (!r.pattern) continue;
      ++patterns_seen;
      if (!verify_pattern(d.circuit, *r.pattern)) ++patterns_rejected;
    }
  }
  v.require(patterns_rejected == 0, std::to_string(patterns_rejected) + " detected patterns failed verification");
  v.require(patterns_seen >= 1000, "fewer than 1000 patterns audited");

  std::size_t circuits = 0, agree = 0, detected = 0, undetectable = 0, aborted = 0;
  AtpgOptions opts;
  opts.random_words_on_abort = 0;  // judge the search alone
  for (std::uint64_t seed = 0; circuits < 600; ++seed) {
    std::mt19937_64 g(seed * 7919 + 1);
    SynthParams p;
    p.keys = 1 + g() % 5;
    p.inputs = 2 + g() % (16 - p.keys - 1);
    p.outputs = 1 + g() % 3;
    p.gates_per_output = 2 + g() % 8;
    p.allow_mux = g() % 3 == 0;
    p.xor_share = 0.3;
    p.cross_fanin = 0.3;
    const Circuit c = random_circuit(p, seed);
    if (c.num_inputs() + c.num_keys() > 16) continue;
    ++circuits;
    const std::size_t t = g() % c.num_keys();
    KeyBits constraints;
    for (std::size_t j = 0; j < c.num_keys(); ++j)
      if (j != t && g() % 2) constraints[j] = g() % 2;
    const Polarity pol = g() % 2 ? Polarity::SA1 : Polarity::SA0;
    const auto r = generate_pattern(c, t, pol, constraints, opts);
    const bool want = ref::detectable_by_enumeration(c, t, pol, constraints);
    if (r.status == AtpgStatus::Aborted) ++aborted;
    if ((r.status == AtpgStatus::Detected) == want && r.status != AtpgStatus::Aborted) ++agree;
    if (r.pattern && !verify_pattern(c, *r.pattern)) ++patterns_rejected;
    (want ? detected : undetectable)++;
  }
  v.require(agree == circuits, std::to_string(circuits - agree) + " verdicts disagree with enumeration");
  v.require(aborted == 0, std::to_string(aborted) + " aborted");
  v.detail << patterns_seen << " detected patterns verified, " << patterns_rejected << " rejected; " << agree << "/"
           << circuits << " small-circuit verdicts match exhaustive enumeration (" << detected << " detectable, "
           << undetectable << " undetectable)";
  report(6, v, since(t0));
}

void criterion7(const Circuit& c880) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  constexpr std::size_t K = 128;
  constexpr int kSeeds = 5;
  std::vector<double> means;
  v.detail << "RLL K=128 mean F_T/K over " << kSeeds << " seeds:";
  for (std::size_t outputs : {20, 40, 80}) {
    double sum = 0;
    for (int s = 0; s < kSeeds; ++s) {
      SynthParams p;
      p.name = "rll_o" + std::to_string(outputs);
      p.inputs = 120;
      p.outputs = outputs;
      p.gates_per_output = 480 / outputs;
      p.cross_fanin = 0.15;
      const auto d = lock_rll(random_circuit(p, 100 + s), K, s);
      const auto r = attack(AttackMethod::Afia, d.circuit, d.correct_key);
      v.require(r.recovered_key == d.correct_key, "wrong key at " + std::to_string(outputs) + " outputs");
      const double per_key = static_cast<double>(r.total_injected_faults) / K;
      v.require(per_key <= 12.0, "F_T/K above 12 at " + std::to_string(outputs) + " outputs");
      sum += per_key;
    }
    means.push_back(sum / kSeeds);
    char buf[64];
    std::snprintf(buf, sizeof buf, " %zu outputs %.3f", outputs, means.back());
    v.detail << buf;
  }
  v.require(means[0] > means[1] && means[1] > means[2], "F_T/K does not decrease with the output count");

  double worst = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const auto d = lock_rll(c880, K, s);
    const auto r = attack(AttackMethod::Afia, d.circuit, d.correct_key);
    v.require(r.recovered_key == d.correct_key, "wrong key on c880");
    worst = std::max(worst, static_cast<double>(r.total_injected_faults) / K);
  }
  v.require(worst <= 12.0, "c880 F_T/K above 12");
  char buf[64];
  std::snprintf(buf, sizeof buf, "; c880 (26 outputs) worst %.3f", worst);
  v.detail << buf << "; bound 12";
  report(7, v, since(t0));
}

}  // namespace

int main() {
  const Circuit c432 = read_bench_file(ref::data_dir() / "c432.bench");
  const Circuit c880 = read_bench_file(ref::data_dir() / "c880.bench");
  const Circuit wide = wide_base();

  criterion1(c880);
  criterion2(wide);
  criterion3(c432, c880);
  criterion4();
  criterion5();
  criterion6();
  criterion7(c880);
  std::cout << (failures ? "acceptance: FAIL" : "acceptance: PASS") << std::endl;
  return failures ? 1 : 0;
}
