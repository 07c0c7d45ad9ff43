#include "afia/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "afia/locking.hpp"

namespace afia {

namespace {

using Json = nlohmann::ordered_json;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json attack_json(const ReportedAttack& ra) {
  const AttackResult& r = ra.result;
  const Accounting acc = account(r);
  Json j;
  j["method"] = std::string(method_name(r.method));
  j["key_size"] = acc.key_size;
  j["recovered_key"] = format_key(r.recovered_key);
  j["recovered_key_hex"] = key_to_hex(r.recovered_key);
  j["pattern_count"] = r.pattern_count;
  j["total_injected_faults"] = r.total_injected_faults;
  j["faults_per_key"] = acc.faults_per_key;
  j["oracle_queries"] = r.oracle_queries;
  j["atpg_backtracks"] = r.atpg_backtracks;
  j["bounds"] = {{"pattern_bound_ok", acc.pattern_bound_ok},
                 {"fault_bound", acc.fault_bound},
                 {"fault_bound_ok", acc.fault_bound_ok},
                 {"ledger_consistent", acc.ledger_consistent}};
  j["anomalies"] = r.anomalies;
  Json bits = Json::array();
  for (const auto& b : r.per_bit) {
    Json e;
    e["key"] = b.key;
    e["pattern"] = b.pattern_id ? Json(*b.pattern_id) : Json(nullptr);
    e["injections"] = b.injections;
    e["value"] = b.value ? 1 : 0;
    e["basis"] = b.basis;
    e["cone"] = b.cone ? Json(*b.cone) : Json(nullptr);
    e["cone_restricted"] = b.cone_restricted;
    bits.push_back(std::move(e));
  }
  j["per_bit"] = std::move(bits);
  j["pattern_file"] = ra.pattern_file.empty() ? Json(nullptr) : Json(ra.pattern_file);
  if (r.verification) {
    j["verification"] = {{"equivalent", r.verification->equivalent},
                         {"mode", r.verification->exhaustive ? "exhaustive" : "sampled"},
                         {"vectors", r.verification->vectors}};
  } else {
    j["verification"] = nullptr;
  }
  return j;
}

FaultTableRow read_row(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  Json j;
  try {
    in >> j;
    FaultTableRow row;
    row.design = j.at("design").at("name").get<std::string>();
    row.key_size = j.at("design").at("key_size").get<std::size_t>();
    for (const auto& a : j.at("attacks")) {
      const auto method = a.at("method").get<std::string>();
      const auto faults = a.at("total_injected_faults").get<std::uint64_t>();
      if (method == "dfa") row.dfa_faults = faults;
      if (method == "afia") row.afia_faults = faults;
    }
    return row;
  } catch (const Json::exception& e) {
    throw std::runtime_error(file.string() + ": not an attack report (" + e.what() + ")");
  }
}

}  // namespace

DesignSummary summarize(const Circuit& c, std::string path) {
  return {c.name(), std::move(path), c.num_inputs(), c.num_outputs(), c.num_gates(), c.num_keys()};
}

std::string attack_report_json(const DesignSummary& design, const std::vector<ReportedAttack>& attacks,
                               bool with_timestamp) {
  Json j;
  j["schema"] = "afia-attack-report/1";
  if (with_timestamp) j["timestamp"] = utc_now();
  j["design"] = {{"name", design.name},         {"path", design.path},   {"inputs", design.inputs},
                 {"outputs", design.outputs},   {"gates", design.gates}, {"key_size", design.key_size}};
  Json list = Json::array();
  for (const auto& a : attacks) list.push_back(attack_json(a));
  j["attacks"] = std::move(list);
  if (attacks.size() > 1) {
    bool same = true;
    for (const auto& a : attacks) same = same && a.result.recovered_key == attacks.front().result.recovered_key;
    j["methods_agree"] = same;
  }
  return j.dump(2) + "\n";
}

std::vector<FaultTableRow> collect_fault_table(const std::filesystem::path& dir, unsigned jobs) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<FaultTableRow> rows(files.size());
  const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(files.size())));
  std::vector<std::future<void>> pending;
  for (unsigned w = 0; w < workers; ++w) {
    pending.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < files.size(); i += workers) rows[i] = read_row(files[i]);
    }));
  }
  for (auto& f : pending) f.get();

  std::stable_sort(rows.begin(), rows.end(), [](const FaultTableRow& a, const FaultTableRow& b) {
    return std::tie(a.design, a.key_size) < std::tie(b.design, b.key_size);
  });
  return rows;
}

std::string fault_table_markdown(const std::vector<FaultTableRow>& rows) {
  std::ostringstream out;
  out << "| Design | K | DFA F_T | AFIA F_T | AFIA F_T/K |\n";
  out << "|---|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out << "| " << r.design << " | " << r.key_size << " | ";
    out << (r.dfa_faults ? std::to_string(*r.dfa_faults) : "-") << " | ";
    out << (r.afia_faults ? std::to_string(*r.afia_faults) : "-") << " | ";
    if (r.afia_faults && r.key_size) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(*r.afia_faults) / static_cast<double>(r.key_size));
      out << buf;
    } else {
      out << "-";
    }
    out << " |\n";
  }
  return out.str();
}

}  // namespace afia
