#include <doctest.h>

#include <filesystem>
#include <random>

#include "afia/locking.hpp"
#include "afia/synth.hpp"
#include "support.hpp"

using namespace afia;

namespace {

Circuit small_base(std::uint64_t seed) {
  SynthParams p;
  p.inputs = 8 + seed % 4;
  p.outputs = 2 + seed % 3;
  p.gates_per_output = 6 + seed % 5;
  return random_circuit(p, seed);
}

// Exhaustive comparison with the reference evaluator.
bool same_function(const Circuit& base, const Circuit& locked, const std::vector<bool>& key) {
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << base.num_inputs()); ++v) {
    const auto pi = ref::bits(v, base.num_inputs());
    if (ref::eval(base, pi, {}) != ref::eval(locked, pi, key)) return false;
  }
  return true;
}

constexpr LockScheme kSchemes[] = {LockScheme::Rll, LockScheme::Chain, LockScheme::Restore};

}  // namespace

TEST_SUITE("locking") {

TEST_CASE("the correct key restores the original function") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Circuit base = small_base(seed);
    for (LockScheme s : kSchemes) {
      const std::size_t k = 1 + seed % 7;
      const auto d = lock(base, {s, k, seed});
      CAPTURE(scheme_name(s));
      CHECK(d.circuit.num_keys() == k);
      CHECK(d.correct_key.size() == k);
      CHECK(d.circuit.num_inputs() == base.num_inputs());
      CHECK(d.circuit.num_outputs() == base.num_outputs());
      CHECK(same_function(base, d.circuit, d.correct_key));
    }
  }
}

TEST_CASE("flipping any single key bit corrupts some output") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Circuit base = small_base(seed);
    for (LockScheme s : kSchemes) {
      const auto d = lock(base, {s, 4, seed});
      for (std::size_t i = 0; i < 4; ++i) {
        auto wrong = d.correct_key;
        wrong[i] = !wrong[i];
        CAPTURE(scheme_name(s));
        CAPTURE(i);
        CHECK_FALSE(same_function(base, d.circuit, wrong));
      }
    }
  }
}

TEST_CASE("key inputs are named keyinput0..K-1") {
  const auto d = lock_rll(small_base(1), 5, 3);
  for (std::size_t k = 0; k < 5; ++k) CHECK(d.circuit.net_name(d.circuit.key_inputs()[k]) == "keyinput" + std::to_string(k));
}

TEST_CASE("locking is deterministic in the seed") {
  const Circuit base = read_bench_file(ref::data_dir() / "c432.bench");
  for (LockScheme s : kSchemes) {
    const auto a = lock(base, {s, 16, 42});
    const auto b = lock(base, {s, 16, 42});
    const auto c = lock(base, {s, 16, 43});
    CHECK(write_bench(a.circuit) == write_bench(b.circuit));
    CHECK(a.correct_key == b.correct_key);
    CHECK((write_bench(a.circuit) != write_bench(c.circuit) || a.correct_key != c.correct_key));
  }
}

TEST_CASE("sampled equivalence on ISCAS bases") {
  for (const char* name : {"c432.bench", "c880.bench"}) {
    const Circuit base = read_bench_file(ref::data_dir() / name);
    for (LockScheme s : kSchemes) {
      const auto d = lock(base, {s, 32, 5});
      EquivalenceOptions eo;
      eo.samples = 2000;
      CHECK(check_equivalence(base, {}, d.circuit, d.correct_key, eo).equivalent);
    }
  }
}

TEST_CASE("RLL key gates sit on distinct observable nets") {
  const Circuit base = read_bench_file(ref::data_dir() / "c880.bench");
  const auto d = lock_rll(base, 64, 2);
  // Every key gate reads exactly one key and drives a net named after the
  // original plus a suffix-free replacement; count key readers.
  for (auto k : d.circuit.key_inputs()) CHECK(d.circuit.fanouts(k).size() == 1);
}

TEST_CASE("restore locking flips exactly one protected pattern under a wrong key") {
  const Circuit base = small_base(4);
  const auto d = lock_restore(base, 4, 11);
  auto wrong = d.correct_key;
  wrong[2] = !wrong[2];
  std::size_t differing = 0;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << base.num_inputs()); ++v) {
    const auto pi = ref::bits(v, base.num_inputs());
    if (ref::eval(base, pi, {}) != ref::eval(d.circuit, pi, wrong)) ++differing;
  }
  // Two 4-bit patterns (the protected one and the applied key) across the
  // remaining free inputs.
  CHECK(differing == 2 * (std::uint64_t{1} << (base.num_inputs() - 4)));
}

TEST_CASE("lock preconditions") {
  const Circuit c17 = read_bench_file(ref::data_dir() / "c17.bench");
  CHECK_THROWS_AS(lock_rll(c17, 0, 1), LockError);
  CHECK_THROWS_AS(lock_rll(c17, 7, 1), LockError);  // only 6 gate nets
  CHECK_THROWS_AS(lock_restore(c17, 6, 1), LockError);
  const auto d = lock_rll(c17, 2, 1);
  CHECK_THROWS_AS(lock_rll(d.circuit, 1, 1), LockError);
  CHECK_THROWS_AS(parse_scheme("sll"), std::invalid_argument);
  CHECK(parse_scheme("CHAIN") == LockScheme::Chain);
}

TEST_CASE("key text forms") {
  const std::vector<bool> key{true, false, true, true, false};  // k0..k4
  CHECK(format_key(key) == "01101");
  CHECK(parse_key("01101\n") == key);
  CHECK(key_to_hex(key) == "0d");
  CHECK(key_to_hex({true, true, true, true, true, true, true, true, true}) == "1ff");
  CHECK_THROWS_AS(parse_key("01a"), std::invalid_argument);
  CHECK_THROWS_AS(parse_key("  "), std::invalid_argument);

  const auto path = std::filesystem::temp_directory_path() / "afia_key_roundtrip.key";
  write_key_file(key, path);
  CHECK(read_key_file(path) == key);
  std::filesystem::remove(path);
}

TEST_CASE("the activated chip answers like the base circuit") {
  const Circuit base = small_base(2);
  const auto d = lock_chain(base, 3, 8);
  SimulatedChip chip = activate(d);
  for (std::uint64_t v = 0; v < 64; ++v) {
    const auto pi = ref::bits(v * 37, base.num_inputs());
    CHECK(chip.respond(pi) == ref::eval(base, pi, {}));
  }
}

}
