#include "afia/atpg.hpp"

#include <bit>
#include <charconv>
#include <random>
#include <sstream>

#include "search.hpp"

namespace afia {

namespace {

std::vector<Logic3> key_vector(const Circuit& c, const TestPattern& p, Logic3 target) {
  std::vector<Logic3> key(c.num_keys(), Logic3::X);
  for (const auto& [k, v] : p.constraints) key[k] = to_logic3(v);
  for (const auto& [k, v] : p.key_values) key[k] = to_logic3(v);
  key[p.target_key] = target;
  return key;
}

// Output values with the target key at its activating value (good machine)
// and stuck (faulty machine).
std::vector<Logic5> fault_effects(const Circuit& c, const TestPattern& p) {
  const auto key = key_vector(c, p, !to_logic3(stuck_value(p.polarity)));
  return simulate_faulty(c, p.pi_values, key, Fault{c.key_inputs()[p.target_key], p.polarity});
}

bool is_effect(Logic5 v) { return v == Logic5::D || v == Logic5::DBar; }

std::optional<std::size_t> first_observed_effect(const std::vector<Logic5>& out,
                                                 const std::vector<std::size_t>& observed) {
  if (observed.empty()) {
    for (std::size_t o = 0; o < out.size(); ++o)
      if (is_effect(out[o])) return o;
    return std::nullopt;
  }
  std::optional<std::size_t> best;
  for (std::size_t o : observed)
    if (is_effect(out[o]) && (!best || o < *best)) best = o;
  return best;
}

void check_request(const Circuit& c, std::size_t target_key, const KeyBits& constraints, const AtpgOptions& opts) {
  if (target_key >= c.num_keys())
    throw PatternError("target key " + std::to_string(target_key) + " out of range (" +
                       std::to_string(c.num_keys()) + " keys)");
  if (constraints.count(target_key))
    throw PatternError("target key " + std::to_string(target_key) + " is also constrained");
  for (const auto& [k, v] : constraints) {
    (void)v;
    if (k >= c.num_keys()) throw PatternError("constraint on key " + std::to_string(k) + " out of range");
  }
  for (std::size_t o : opts.observe_outputs)
    if (o >= c.num_outputs()) throw PatternError("observed output " + std::to_string(o) + " out of range");
}

// Greedily returns assigned free keys, then primary inputs, to X while the
// fault stays detected. Detection is monotone in the assignment, so a key that
// could not be dropped here stays necessary after later inputs are dropped.
void minimise(const Circuit& c, TestPattern& p, const std::vector<std::size_t>& observed) {
  std::vector<std::size_t> assigned;
  for (const auto& [k, v] : p.key_values) {
    (void)v;
    assigned.push_back(k);
  }
  for (std::size_t k : assigned) {
    const bool v = p.key_values.at(k);
    p.key_values.erase(k);
    if (!first_observed_effect(fault_effects(c, p), observed)) p.key_values[k] = v;
  }
  for (std::size_t i = 0; i < p.pi_values.size(); ++i) {
    if (!is_known(p.pi_values[i])) continue;
    const Logic3 v = p.pi_values[i];
    p.pi_values[i] = Logic3::X;
    if (!first_observed_effect(fault_effects(c, p), observed)) p.pi_values[i] = v;
  }
  const KeyBits kept = p.key_values;
  for (const auto& [k, v] : kept) {
    p.key_values.erase(k);
    const bool needed = !first_observed_effect(fault_effects(c, p), observed);
    p.key_values[k] = v;
    if (!needed) p.surplus.push_back(k);
  }
}

// Random simulation of the good and faulty machines, 64 assignments at a time.
// Returns a fully specified detecting assignment, or nothing.
std::optional<detail::SearchResult> random_detection(const Circuit& c, std::size_t target_key, Polarity polarity,
                                                     const KeyBits& constraints, const AtpgOptions& opts) {
  std::mt19937_64 rng(opts.random_seed ^ (target_key * 0x9e3779b97f4a7c15ULL) ^ static_cast<unsigned>(polarity));
  std::vector<std::uint64_t> pi(c.num_inputs());
  std::vector<std::uint64_t> key(c.num_keys());
  std::vector<std::size_t> observed = opts.observe_outputs;
  if (observed.empty())
    for (std::size_t o = 0; o < c.num_outputs(); ++o) observed.push_back(o);
  const std::uint64_t stuck = stuck_value(polarity) ? ~std::uint64_t{0} : 0;

  for (std::size_t w = 0; w < opts.random_words_on_abort; ++w) {
    for (auto& v : pi) v = rng();
    for (std::size_t k = 0; k < key.size(); ++k) {
      const auto it = constraints.find(k);
      key[k] = it == constraints.end() ? rng() : (it->second ? ~std::uint64_t{0} : 0);
    }
    key[target_key] = ~stuck;
    const auto good = simulate_words(c, pi, key);
    key[target_key] = stuck;
    const auto bad = simulate_words(c, pi, key);
    std::uint64_t diff = 0;
    for (std::size_t o : observed) diff |= good[o] ^ bad[o];
    if (!diff) continue;

    const int lane = std::countr_zero(diff);
    detail::SearchResult r;
    r.status = AtpgStatus::Detected;
    for (auto v : pi) r.pi.push_back(to_logic3((v >> lane) & 1));
    r.keys.assign(c.num_keys(), Logic3::X);
    for (std::size_t k = 0; k < key.size(); ++k)
      if (k != target_key && !constraints.count(k)) r.keys[k] = to_logic3((key[k] >> lane) & 1);
    return r;
  }
  return std::nullopt;
}

}  // namespace

std::string_view status_name(AtpgStatus s) noexcept {
  switch (s) {
    case AtpgStatus::Detected: return "DETECTED";
    case AtpgStatus::Undetectable: return "UNDETECTABLE";
    case AtpgStatus::Aborted: return "ABORTED";
  }
  return "?";
}

AtpgOutcome generate_pattern(const Circuit& c, std::size_t target_key, Polarity polarity,
                             const KeyBits& constraints, const AtpgOptions& opts) {
  check_request(c, target_key, constraints, opts);
  auto found = detail::run_search(c, target_key, polarity, constraints, opts);
  if (found.status == AtpgStatus::Aborted) {
    if (auto r = random_detection(c, target_key, polarity, constraints, opts)) {
      r->backtracks = found.backtracks;
      found = std::move(*r);
    }
  }
  AtpgOutcome outcome;
  outcome.status = found.status;
  outcome.backtracks = found.backtracks;
  if (found.status != AtpgStatus::Detected) return outcome;

  TestPattern p;
  p.pi_values = found.pi;
  p.constraints = constraints;
  p.target_key = target_key;
  p.polarity = polarity;
  for (std::size_t k = 0; k < c.num_keys(); ++k) {
    if (k == target_key || constraints.count(k) || !is_known(found.keys[k])) continue;
    p.key_values[k] = found.keys[k] == Logic3::One;
  }
  if (!first_observed_effect(fault_effects(c, p), opts.observe_outputs))
    throw std::logic_error("search returned a pattern that does not detect key " + std::to_string(target_key));
  minimise(c, p, opts.observe_outputs);

  const auto effects = fault_effects(c, p);
  p.detect_po = *first_observed_effect(effects, opts.observe_outputs);
  p.expected_good.resize(effects.size());
  p.expected_faulty.resize(effects.size());
  for (std::size_t o = 0; o < effects.size(); ++o) {
    const auto [g, f] = decompose(effects[o]);
    p.expected_good[o] = g;
    p.expected_faulty[o] = f;
  }
  outcome.pattern = std::move(p);
  return outcome;
}

AtpgOutcome generate_pattern(const Circuit& c, Fault target, const KeyBits& constraints, const AtpgOptions& opts) {
  const auto k = target.net < c.num_nets() ? c.key_index(target.net) : std::nullopt;
  if (!k) throw PatternError("fault target must be a key input");
  return generate_pattern(c, *k, target.polarity, constraints, opts);
}

void check_well_formed(const Circuit& c, const TestPattern& p) {
  if (p.pi_values.size() != c.num_inputs())
    throw PatternError("pattern has " + std::to_string(p.pi_values.size()) + " input values, circuit has " +
                       std::to_string(c.num_inputs()));
  if (p.target_key >= c.num_keys()) throw PatternError("target key out of range");
  if (p.constraints.count(p.target_key)) throw PatternError("target key is also constrained");
  if (p.key_values.count(p.target_key)) throw PatternError("target key is also a free key assignment");
  for (const auto& [k, v] : p.key_values) {
    (void)v;
    if (k >= c.num_keys()) throw PatternError("free key " + std::to_string(k) + " out of range");
    if (p.constraints.count(k)) throw PatternError("key " + std::to_string(k) + " is both free and constrained");
  }
  for (const auto& [k, v] : p.constraints) {
    (void)v;
    if (k >= c.num_keys()) throw PatternError("constrained key " + std::to_string(k) + " out of range");
  }
  if (p.detect_po >= c.num_outputs()) throw PatternError("detect_po out of range");
  if (p.expected_good.size() <= p.detect_po || p.expected_faulty.size() <= p.detect_po)
    throw PatternError("expected values missing at detect_po");
}

bool verify_pattern(const Circuit& c, const TestPattern& p) {
  check_well_formed(c, p);
  const Logic5 seen = fault_effects(c, p)[p.detect_po];
  return is_effect(seen) && seen == compose(p.good_at_po(), p.faulty_at_po());
}

std::vector<AtpgOutcome> dfa_pattern_set(const Circuit& c, Polarity polarity, const AtpgOptions& opts) {
  std::vector<AtpgOutcome> out;
  out.reserve(c.num_keys());
  for (std::size_t i = 0; i < c.num_keys(); ++i) {
    KeyBits constraints;
    for (std::size_t j = 0; j < c.num_keys(); ++j)
      if (j != i) constraints[j] = stuck_value(polarity);
    out.push_back(generate_pattern(c, i, polarity, constraints, opts));
  }
  return out;
}

std::string format_pattern(const TestPattern& p) {
  std::string s = "pi=";
  for (Logic3 v : p.pi_values) s += to_char(v);
  auto bits = [&](const char* tag, const KeyBits& m) {
    s += tag;
    bool first = true;
    for (const auto& [k, v] : m) {
      if (!first) s += ',';
      first = false;
      s += std::to_string(k) + ':' + (v ? '1' : '0');
    }
  };
  bits(" keys=", p.key_values);
  bits(" constr=", p.constraints);
  s += " fault=k" + std::to_string(p.target_key) + ":sa" + (stuck_value(p.polarity) ? "1" : "0");
  s += " po=" + std::to_string(p.detect_po);
  s += std::string(" good=") + to_char(p.good_at_po());
  s += std::string(" faulty=") + to_char(p.faulty_at_po());
  return s;
}

namespace {

std::size_t parse_index(std::string_view text, std::string_view what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw PatternError("bad " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

KeyBits parse_bits(std::string_view text, std::string_view what) {
  KeyBits m;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos || colon + 2 != item.size() ||
        (item[colon + 1] != '0' && item[colon + 1] != '1'))
      throw PatternError("bad " + std::string(what) + " entry '" + std::string(item) + "'");
    const auto k = parse_index(item.substr(0, colon), what);
    if (!m.emplace(k, item[colon + 1] == '1').second)
      throw PatternError("duplicate " + std::string(what) + " entry for key " + std::to_string(k));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return m;
}

}  // namespace

TestPattern parse_pattern(std::string_view line) {
  std::map<std::string, std::string, std::less<>> fields;
  std::istringstream in{std::string(line)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw PatternError("pattern field without '=': " + token);
    if (!fields.emplace(token.substr(0, eq), token.substr(eq + 1)).second)
      throw PatternError("duplicate pattern field " + token.substr(0, eq));
  }
  for (const char* name : {"pi", "keys", "constr", "fault", "po", "good", "faulty"})
    if (!fields.count(name)) throw PatternError(std::string("pattern is missing field ") + name);
  if (fields.size() != 7) throw PatternError("pattern has unknown fields");

  TestPattern p;
  try {
    for (char ch : fields["pi"]) p.pi_values.push_back(logic3_from_char(ch));
  } catch (const std::invalid_argument& e) {
    throw PatternError(e.what());
  }
  p.key_values = parse_bits(fields["keys"], "keys");
  p.constraints = parse_bits(fields["constr"], "constr");

  const std::string_view fault = fields["fault"];
  const auto colon = fault.find(':');
  if (fault.size() < 5 || fault[0] != 'k' || colon == std::string_view::npos || fault.substr(colon).size() != 4 ||
      fault.substr(colon, 3) != ":sa" || (fault.back() != '0' && fault.back() != '1'))
    throw PatternError("bad fault '" + std::string(fault) + "'");
  p.target_key = parse_index(fault.substr(1, colon - 1), "fault key");
  p.polarity = fault.back() == '1' ? Polarity::SA1 : Polarity::SA0;

  p.detect_po = parse_index(fields["po"], "po");
  auto one_value = [&](const std::string& name) {
    const auto& v = fields[name];
    if (v.size() != 1) throw PatternError("bad " + name + " value '" + v + "'");
    try {
      return logic3_from_char(v[0]);
    } catch (const std::invalid_argument& e) {
      throw PatternError(e.what());
    }
  };
  p.expected_good.assign(p.detect_po + 1, Logic3::X);
  p.expected_faulty.assign(p.detect_po + 1, Logic3::X);
  p.expected_good[p.detect_po] = one_value("good");
  p.expected_faulty[p.detect_po] = one_value("faulty");
  return p;
}

}  // namespace afia
