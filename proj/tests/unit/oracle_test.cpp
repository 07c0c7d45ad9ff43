#include <doctest.h>

#include "afia/oracle.hpp"
#include "support.hpp"

using namespace afia;

namespace {

Circuit xor_lock() {
  return parse_bench(
      "INPUT(a)\nINPUT(b)\nINPUT(keyinput0)\nINPUT(keyinput1)\nOUTPUT(y)\nOUTPUT(z)\n"
      "t = AND(a, b)\ny = XOR(t, keyinput0)\nz = XNOR(a, keyinput1)\n");
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("responses use the programmed key unless a register is forced") {
  SimulatedChip chip(xor_lock(), {true, false});
  CHECK(chip.respond(std::vector<bool>{true, true}) == std::vector<bool>{false, false});
  CHECK(chip.respond(std::vector<bool>{true, true}, {{0, false}}) == std::vector<bool>{true, false});
  CHECK(chip.respond(std::vector<bool>{false, true}, {{1, true}}) == std::vector<bool>{true, false});
}

TEST_CASE("counters: one query per response, one fault per forced register") {
  SimulatedChip chip(xor_lock(), {false, false});
  CHECK(chip.query_count() == 0);
  chip.respond(std::vector<bool>{false, false});
  chip.respond(std::vector<bool>{false, false}, {{0, true}, {1, true}});
  CHECK(chip.query_count() == 2);
  CHECK(chip.injected_fault_count() == 2);
  const std::vector<std::uint64_t> words{0xff, 0x0f};
  const auto out = chip.respond_words(words);
  CHECK(out.size() == 2);
  CHECK(out[0] == (0xffULL & 0x0fULL));
  CHECK(chip.query_count() == 66);
  CHECK(chip.injected_fault_count() == 2);
}

TEST_CASE("bad requests are rejected without counting") {
  SimulatedChip chip(xor_lock(), {false, true});
  const std::vector<Logic3> with_x{Logic3::One, Logic3::X};
  CHECK_THROWS_AS(chip.respond(with_x), std::invalid_argument);
  CHECK_THROWS_AS(chip.respond(std::vector<bool>{true}), std::invalid_argument);
  CHECK_THROWS_AS(chip.respond(std::vector<bool>{true, true}, {{2, true}}), std::invalid_argument);
  CHECK(chip.query_count() == 0);
  CHECK(chip.injected_fault_count() == 0);
}

TEST_CASE("the chip needs a key of the right length") {
  CHECK_THROWS_AS(SimulatedChip(xor_lock(), {true}), std::invalid_argument);
}

}
