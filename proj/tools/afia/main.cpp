#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "afia/attack.hpp"
#include "afia/atpg.hpp"
#include "afia/cone.hpp"
#include "afia/locking.hpp"
#include "afia/netlist.hpp"
#include "afia/report.hpp"

namespace fs = std::filesystem;
using namespace afia;

namespace {

enum Exit : int { kOk = 0, kInputError = 1, kUsage = 2, kUnresolvable = 3, kMismatch = 4 };

// Raised for bad flag values that CLI11 cannot check by itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_backtrack_limit() {
  if (const char* env = std::getenv("AFIA_BACKTRACK_LIMIT")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size() && v > 0) return v;
    } catch (const std::exception&) {
    }
    std::cerr << "afia: ignoring AFIA_BACKTRACK_LIMIT='" << env << "'\n";
  }
  return AtpgOptions{}.backtrack_limit;
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

KeyBits parse_constraints(const std::string& text) {
  KeyBits m;
  if (text.empty()) return m;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon + 2 != item.size() || (item.back() != '0' && item.back() != '1'))
      throw UsageError("bad constraint '" + item + "', expected KEY:VALUE");
    m[std::stoul(item.substr(0, colon))] = item.back() == '1';
  }
  return m;
}

VerifyOptions parse_verify_mode(const std::string& mode, bool& enabled) {
  VerifyOptions v;
  enabled = true;
  if (mode == "auto") return v;
  if (mode == "none") {
    enabled = false;
    return v;
  }
  if (mode == "exhaustive") {
    v.exhaustive_limit = 32;
    return v;
  }
  if (mode.rfind("sampled", 0) == 0) {
    v.exhaustive_limit = 0;
    if (mode.size() > 8 && mode[7] == ':') v.samples = std::stoull(mode.substr(8));
    else if (mode.size() != 7) throw UsageError("bad verification mode '" + mode + "'");
    return v;
  }
  throw UsageError("bad verification mode '" + mode + "' (auto, none, exhaustive, sampled[:N])");
}

// ---- lock -----------------------------------------------------------------

struct LockArgs {
  std::string input, output, key_out, scheme = "rll";
  std::size_t keys = 32;
  std::uint64_t seed = 0;
};

int run_lock(const LockArgs& a) {
  const Circuit base = read_bench_file(a.input);
  const LockedDesign d = lock(base, {parse_scheme(a.scheme), a.keys, a.seed});
  std::string out = a.output;
  if (out.empty())
    out = fs::path(a.input).stem().string() + "_" + std::string(scheme_name(d.recipe.scheme)) + "_k" +
          std::to_string(a.keys) + ".bench";
  const std::string key_out = a.key_out.empty() ? fs::path(out).replace_extension(".key").string() : a.key_out;
  write_bench_file(d.circuit, out);
  write_key_file(d.correct_key, key_out);
  std::cerr << "locked " << base.name() << " with " << a.keys << " " << scheme_name(d.recipe.scheme)
            << " key bits -> " << out << " (key in " << key_out << ")\n";
  return kOk;
}

// ---- cones ----------------------------------------------------------------

int run_cones(const std::string& input, const std::string& output) {
  const Circuit c = read_bench_file(input);
  const ConeSet cones = extract_cones(c);
  const AssociationMatrix m = build_assoc_matrix(cones);

  nlohmann::ordered_json j;
  j["design"] = c.name();
  j["key_size"] = c.num_keys();
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& cone : cones.cones) {
    list.push_back({{"index", cone.output_index},
                    {"output", c.net_name(cone.output)},
                    {"gates", cone.gates.size()},
                    {"inputs", cone.inputs.size()},
                    {"key_count", cone.keys.size()},
                    {"keys", cone.keys}});
  }
  j["cones"] = std::move(list);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < m.num_keys(); ++k) {
    std::vector<int> row;
    for (std::size_t o = 0; o < m.num_cones(); ++o) row.push_back(m.at(k, o) ? 1 : 0);
    rows.push_back(row);
  }
  j["matrix"] = std::move(rows);
  j["orphan_keys"] = m.orphan_keys();
  write_text(j.dump(2) + "\n", output);
  return kOk;
}

// ---- atpg -----------------------------------------------------------------

struct AtpgArgs {
  std::string input, output, polarity = "sa1", constraints;
  std::vector<std::size_t> keys, observe;
  bool dfa = false;
  std::uint64_t backtrack_limit = 0;
};

int run_atpg_cmd(const AtpgArgs& a) {
  const Circuit c = read_bench_file(a.input);
  Polarity pol;
  if (a.polarity == "sa1") pol = Polarity::SA1;
  else if (a.polarity == "sa0") pol = Polarity::SA0;
  else throw UsageError("polarity must be sa0 or sa1");

  AtpgOptions opts;
  opts.backtrack_limit = a.backtrack_limit;
  opts.observe_outputs = a.observe;

  std::ostringstream out;
  auto emit = [&](std::size_t k, const AtpgOutcome& r) {
    if (r.pattern) out << format_pattern(*r.pattern) << "\n";
    else out << "# k" << k << " " << status_name(r.status) << " after " << r.backtracks << " backtracks\n";
  };

  if (a.dfa) {
    const auto all = dfa_pattern_set(c, pol, opts);
    for (std::size_t k = 0; k < all.size(); ++k) emit(k, all[k]);
  } else {
    const KeyBits given = parse_constraints(a.constraints);
    std::vector<std::size_t> targets = a.keys;
    if (targets.empty())
      for (std::size_t k = 0; k < c.num_keys(); ++k)
        if (!given.count(k)) targets.push_back(k);
    for (std::size_t k : targets) emit(k, generate_pattern(c, k, pol, given, opts));
  }
  write_text(out.str(), a.output);
  return kOk;
}

// ---- attack ---------------------------------------------------------------

struct AttackArgs {
  std::string input, oracle_key, method = "afia", output, patterns, verify = "auto";
  std::uint64_t backtrack_limit = 0;
  bool no_timestamp = false;
};

int run_attack_cmd(const AttackArgs& a) {
  const Circuit c = read_bench_file(a.input);
  std::vector<AttackMethod> methods;
  if (a.method == "afia" || a.method == "both") methods.push_back(AttackMethod::Afia);
  if (a.method == "dfa" || a.method == "both") methods.push_back(AttackMethod::Dfa);
  if (methods.empty()) throw UsageError("method must be afia, dfa or both");

  AttackConfig cfg;
  cfg.atpg.backtrack_limit = a.backtrack_limit;
  cfg.verification = parse_verify_mode(a.verify, cfg.verify);

  std::vector<ReportedAttack> reports;
  bool mismatch = false;
  for (AttackMethod m : methods) {
    // A fresh chip per method so query counters start at zero.
    SimulatedChip chip(c, read_key_file(a.oracle_key));
    ReportedAttack ra{run_attack(m, c, chip, cfg), {}};
    if (!a.patterns.empty()) {
      ra.pattern_file = a.patterns + "." + std::string(method_name(m)) + ".patterns";
      std::ostringstream lines;
      for (const auto& p : ra.result.patterns) lines << format_pattern(p) << "\n";
      write_text(lines.str(), ra.pattern_file);
    }
    const auto& r = ra.result;
    std::cerr << method_name(m) << ": key " << key_to_hex(r.recovered_key) << ", " << r.pattern_count
              << " patterns, " << r.total_injected_faults << " injected faults";
    if (r.verification) std::cerr << (r.verification->equivalent ? ", verified" : ", NOT equivalent");
    std::cerr << "\n";
    if (r.verification && !r.verification->equivalent) mismatch = true;
    reports.push_back(std::move(ra));
  }
  if (reports.size() > 1 && reports[0].result.recovered_key != reports[1].result.recovered_key) {
    std::cerr << "afia: methods disagree on the key\n";
    mismatch = true;
  }
  write_text(attack_report_json(summarize(c, a.input), reports, !a.no_timestamp), a.output);
  return mismatch ? kMismatch : kOk;
}

// ---- report ---------------------------------------------------------------

int run_table1(const std::string& dir, unsigned jobs, const std::string& output) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir + " is not a directory");
  write_text(fault_table_markdown(collect_fault_table(dir, jobs)), output);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fault-injection key recovery for logic-locked netlists"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "afia 0.1.0");
  const std::uint64_t bt_default = default_backtrack_limit();

  LockArgs lock_args;
  auto* lock_cmd = app.add_subcommand("lock", "Insert key gates into a .bench netlist");
  lock_cmd->add_option("input", lock_args.input, "Unlocked .bench file")->required()->check(CLI::ExistingFile);
  lock_cmd->add_option("--scheme", lock_args.scheme, "rll, chain or restore")
      ->capture_default_str()
      ->check(CLI::IsMember({"rll", "chain", "restore"}));
  lock_cmd->add_option("--keys,-k", lock_args.keys, "Key size")->capture_default_str()->check(CLI::PositiveNumber);
  lock_cmd->add_option("--seed", lock_args.seed, "Random seed")->capture_default_str();
  lock_cmd->add_option("-o,--output", lock_args.output, "Locked .bench (default <stem>_<scheme>_k<K>.bench)");
  lock_cmd->add_option("--key-out", lock_args.key_out, "Key file (default next to the output, .key)");

  std::string cones_in, cones_out;
  auto* cones_cmd = app.add_subcommand("cones", "Output cones and key/cone association matrix as JSON");
  cones_cmd->add_option("input", cones_in, "Locked .bench file")->required()->check(CLI::ExistingFile);
  cones_cmd->add_option("-o,--output", cones_out, "JSON file (default stdout)");

  AtpgArgs atpg_args;
  atpg_args.backtrack_limit = bt_default;
  auto* atpg_cmd = app.add_subcommand("atpg", "Generate key-fault test patterns");
  atpg_cmd->add_option("input", atpg_args.input, "Locked .bench file")->required()->check(CLI::ExistingFile);
  atpg_cmd->add_option("--key", atpg_args.keys, "Target key index (repeatable, default all)");
  atpg_cmd->add_option("--polarity", atpg_args.polarity, "sa1 or sa0")
      ->capture_default_str()
      ->check(CLI::IsMember({"sa0", "sa1"}));
  atpg_cmd->add_option("--constrain", atpg_args.constraints, "Known keys, e.g. 0:1,3:0");
  atpg_cmd->add_option("--observe", atpg_args.observe, "Output indices to observe (default all)");
  atpg_cmd->add_flag("--dfa", atpg_args.dfa, "Pattern set with every other key at the stuck value");
  atpg_cmd->add_option("--backtrack-limit", atpg_args.backtrack_limit)->capture_default_str();
  atpg_cmd->add_option("-o,--output", atpg_args.output, "Pattern file (default stdout)");

  AttackArgs attack_args;
  attack_args.backtrack_limit = bt_default;
  auto* attack_cmd = app.add_subcommand("attack", "Recover the key from a simulated activated chip");
  attack_cmd->add_option("input", attack_args.input, "Locked .bench file")->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--oracle-key", attack_args.oracle_key, "Key programmed into the simulated chip")
      ->required()
      ->check(CLI::ExistingFile);
  attack_cmd->add_option("--method", attack_args.method, "afia, dfa or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"afia", "dfa", "both"}));
  attack_cmd->add_option("--verify", attack_args.verify, "auto, none, exhaustive or sampled[:N]")
      ->capture_default_str();
  attack_cmd->add_option("--backtrack-limit", attack_args.backtrack_limit)->capture_default_str();
  attack_cmd->add_option("--patterns", attack_args.patterns, "Write patterns to PREFIX.<method>.patterns");
  attack_cmd->add_option("-o,--output", attack_args.output, "JSON report (default stdout)");
  attack_cmd->add_flag("--no-timestamp", attack_args.no_timestamp, "Leave the timestamp out of the report");

  std::string report_dir, report_out;
  unsigned jobs = 1;
  auto* report_cmd = app.add_subcommand("report", "Summaries over attack reports");
  report_cmd->require_subcommand(1);
  auto* table1_cmd = report_cmd->add_subcommand("table1", "Markdown fault-count table from a directory of reports");
  table1_cmd->add_option("dir", report_dir, "Directory of *.json attack reports")->required();
  table1_cmd->add_option("--jobs,-j", jobs, "Parallel readers")->capture_default_str()->check(CLI::PositiveNumber);
  table1_cmd->add_option("-o,--output", report_out, "Markdown file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*lock_cmd) return run_lock(lock_args);
    if (*cones_cmd) return run_cones(cones_in, cones_out);
    if (*atpg_cmd) return run_atpg_cmd(atpg_args);
    if (*attack_cmd) return run_attack_cmd(attack_args);
    if (*table1_cmd) return run_table1(report_dir, jobs, report_out);
  } catch (const UsageError& e) {
    std::cerr << "afia: " << e.what() << "\n";
    return kUsage;
  } catch (const UnresolvableKey& e) {
    std::cerr << "afia: " << e.what() << "\n";
    return kUnresolvable;
  } catch (const OracleInconsistency& e) {
    std::cerr << "afia: " << e.what() << "\n";
    return kMismatch;
  } catch (const NetlistError& e) {
    std::cerr << "afia: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "afia: " << e.what() << "\n";
    return kInputError;
  }
  return kUsage;
}
