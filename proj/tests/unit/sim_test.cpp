#include <doctest.h>

#include <random>

#include "afia/sim.hpp"
#include "afia/synth.hpp"
#include "support.hpp"

using namespace afia;

namespace {

Circuit sample_circuit(std::uint64_t seed) {
  SynthParams p;
  p.inputs = 6 + seed % 5;
  p.outputs = 1 + seed % 4;
  p.gates_per_output = 4 + seed % 8;
  p.keys = seed % 5;
  p.allow_mux = true;
  p.xor_share = 0.3;
  return random_circuit(p, seed);
}

std::vector<Logic3> as_logic3(const std::vector<bool>& b) {
  std::vector<Logic3> v;
  for (bool x : b) v.push_back(to_logic3(x));
  return v;
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("c17 truth table spot checks") {
  const Circuit c = read_bench_file(ref::data_dir() / "c17.bench");
  for (unsigned v = 0; v < 32; ++v) {
    const auto pi = ref::bits(v, 5);
    const auto out = simulate(c, as_logic3(pi), {});
    const auto want = ref::eval(c, pi, {});
    CHECK(out[0] == to_logic3(want[0]));
    CHECK(out[1] == to_logic3(want[1]));
  }
}

TEST_CASE("three-valued simulation agrees with the reference on full assignments") {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Circuit c = sample_circuit(seed);
    for (int t = 0; t < 20; ++t) {
      const auto pi = ref::bits(rng(), c.num_inputs());
      const auto key = ref::bits(rng(), c.num_keys());
      CHECK(simulate(c, as_logic3(pi), as_logic3(key)) == as_logic3(ref::eval(c, pi, key)));
    }
  }
}

TEST_CASE("X results are sound: determinate outputs hold for all completions") {
  std::mt19937_64 rng(2);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Circuit c = sample_circuit(seed);
    std::vector<Logic3> pi(c.num_inputs());
    for (auto& v : pi) v = static_cast<Logic3>(rng() % 3);
    const auto key = ref::bits(rng(), c.num_keys());
    const auto out = simulate(c, pi, as_logic3(key));
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < pi.size(); ++i)
      if (!is_known(pi[i])) open.push_back(i);
    for (std::uint64_t fill = 0; fill < (std::uint64_t{1} << open.size()); ++fill) {
      std::vector<bool> full(pi.size());
      for (std::size_t i = 0; i < pi.size(); ++i) full[i] = pi[i] == Logic3::One;
      for (std::size_t j = 0; j < open.size(); ++j) full[open[j]] = (fill >> j) & 1;
      const auto want = ref::eval(c, full, key);
      for (std::size_t o = 0; o < out.size(); ++o)
        if (is_known(out[o])) CHECK(out[o] == to_logic3(want[o]));
    }
  }
}

TEST_CASE("five-valued fault simulation agrees with two fault-free runs") {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Circuit c = sample_circuit(seed);
    if (c.num_keys() == 0) continue;
    for (int t = 0; t < 10; ++t) {
      const auto pi = ref::bits(rng(), c.num_inputs());
      auto key = ref::bits(rng(), c.num_keys());
      const std::size_t target = rng() % c.num_keys();
      const Polarity pol = rng() & 1 ? Polarity::SA1 : Polarity::SA0;
      const auto five = simulate_faulty(c, as_logic3(pi), as_logic3(key), Fault{c.key_inputs()[target], pol});
      const auto good = ref::eval(c, pi, key);
      key[target] = stuck_value(pol);
      const auto bad = ref::eval(c, pi, key);
      for (std::size_t o = 0; o < c.num_outputs(); ++o)
        CHECK(five[o] == compose(to_logic3(good[o]), to_logic3(bad[o])));
    }
  }
}

TEST_CASE("word simulation agrees with the reference lane by lane") {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Circuit c = sample_circuit(seed);
    std::vector<std::uint64_t> pi(c.num_inputs()), key(c.num_keys());
    for (auto& w : pi) w = rng();
    for (auto& w : key) w = rng();
    const auto out = simulate_words(c, pi, key);
    for (int lane = 0; lane < 64; lane += 7) {
      std::vector<bool> p, k;
      for (auto w : pi) p.push_back((w >> lane) & 1);
      for (auto w : key) k.push_back((w >> lane) & 1);
      const auto want = ref::eval(c, p, k);
      for (std::size_t o = 0; o < out.size(); ++o) CHECK(((out[o] >> lane) & 1) == want[o]);
    }
  }
}

TEST_CASE("name-keyed simulation rejects unknown names") {
  const Circuit c = read_bench_file(ref::data_dir() / "c17.bench");
  CHECK_THROWS_AS(simulate(c, {{"nope", Logic3::One}}), std::invalid_argument);
  CHECK_THROWS_AS(simulate(c, {{"N10", Logic3::One}}), std::invalid_argument);
  // N3 = 0 forces N10 = N11 = 1, so N16 = !N2 = 0 and both outputs are 1
  // whatever N6 and N7 are.
  auto out = simulate(c, {{"N3", Logic3::Zero}, {"N2", Logic3::One}});
  CHECK(out == std::vector{Logic3::One, Logic3::One});
  out = simulate(c, {{"N3", Logic3::Zero}});
  CHECK(out == std::vector{Logic3::X, Logic3::X});
}

TEST_CASE("equivalence checking finds a counterexample for a wrong key") {
  const Circuit c = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(keyinput0)\nOUTPUT(y)\nt = AND(a, b)\ny = XOR(t, keyinput0)\n");
  auto r = check_equivalence(c, {false}, c, {false});
  CHECK(r.equivalent);
  CHECK(r.exhaustive);
  CHECK(r.vectors == 4);
  r = check_equivalence(c, {false}, c, {true});
  CHECK_FALSE(r.equivalent);
  REQUIRE(r.counterexample);
}

}
