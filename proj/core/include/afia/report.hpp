#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "afia/attack.hpp"

namespace afia {

struct DesignSummary {
  std::string name;
  std::string path;
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::size_t gates = 0;
  std::size_t key_size = 0;
};

DesignSummary summarize(const Circuit& c, std::string path = {});

struct ReportedAttack {
  AttackResult result;
  /// Where the patterns were written, if anywhere.
  std::string pattern_file;
};

/// Attack report as pretty-printed JSON. Apart from the optional `timestamp`
/// field the text depends only on its arguments.
std::string attack_report_json(const DesignSummary& design, const std::vector<ReportedAttack>& attacks,
                               bool with_timestamp = true);

struct FaultTableRow {
  std::string design;
  std::size_t key_size = 0;
  std::optional<std::uint64_t> dfa_faults;
  std::optional<std::uint64_t> afia_faults;
};

/// Reads every `*.json` attack report in `dir` (not recursive), sorted by
/// design name then key size. Throws std::runtime_error on malformed files.
std::vector<FaultTableRow> collect_fault_table(const std::filesystem::path& dir, unsigned jobs = 1);

/// Markdown table with columns design, K, DFA F_T, AFIA F_T and AFIA F_T/K.
std::string fault_table_markdown(const std::vector<FaultTableRow>& rows);

}  // namespace afia
