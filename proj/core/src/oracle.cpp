#include "afia/oracle.hpp"

#include <stdexcept>

#include "afia/sim.hpp"

namespace afia {

std::vector<bool> Oracle::respond(std::span<const Logic3> pi, const KeyBits& injections) {
  std::vector<bool> bits(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] == Logic3::X)
      throw std::invalid_argument("oracle input " + std::to_string(i) + " is X; fill don't-cares first");
    bits[i] = pi[i] == Logic3::One;
  }
  return respond(bits, injections);
}

std::vector<bool> Oracle::respond(const std::vector<bool>& pi, const KeyBits& injections) {
  if (pi.size() != num_inputs())
    throw std::invalid_argument("oracle expects " + std::to_string(num_inputs()) + " inputs, got " +
                                std::to_string(pi.size()));
  for (const auto& [index, value] : injections) {
    (void)value;
    if (index >= num_keys())
      throw std::invalid_argument("injection at key " + std::to_string(index) + " out of range");
  }
  auto out = evaluate(pi, injections);
  ++queries_;
  injected_ += injections.size();
  return out;
}

std::vector<std::uint64_t> Oracle::respond_words(std::span<const std::uint64_t> pi_words) {
  if (pi_words.size() != num_inputs()) throw std::invalid_argument("oracle expects one word per input");
  auto out = evaluate_words(pi_words);
  queries_ += 64;
  return out;
}

SimulatedChip::SimulatedChip(Circuit circuit, std::vector<bool> key)
    : circuit_(std::move(circuit)), key_(std::move(key)) {
  if (key_.size() != circuit_.num_keys())
    throw std::invalid_argument("key has " + std::to_string(key_.size()) + " bits, circuit has " +
                                std::to_string(circuit_.num_keys()) + " key inputs");
}

std::vector<bool> SimulatedChip::evaluate(const std::vector<bool>& pi, const KeyBits& injections) {
  std::vector<Logic3> in(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) in[i] = to_logic3(pi[i]);
  std::vector<Logic3> key(key_.size());
  for (std::size_t i = 0; i < key_.size(); ++i) key[i] = to_logic3(key_[i]);
  for (const auto& [index, value] : injections) key[index] = to_logic3(value);
  const auto out = simulate(circuit_, in, key);
  std::vector<bool> bits(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) bits[i] = out[i] == Logic3::One;
  return bits;
}

std::vector<std::uint64_t> SimulatedChip::evaluate_words(std::span<const std::uint64_t> pi_words) {
  const auto key = broadcast_key(key_);
  return simulate_words(circuit_, pi_words, key);
}

}  // namespace afia
