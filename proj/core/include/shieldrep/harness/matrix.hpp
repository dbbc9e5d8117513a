#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shieldrep/harness/report.hpp"

namespace shieldrep::harness {

/// Cells: protocols x read_ratios x adversaries x seeds, sharing `base`.
struct MatrixSpec {
  std::vector<Protocol> protocols;
  std::vector<double> read_ratios;
  std::vector<std::string> adversaries;
  std::vector<std::uint64_t> seeds{1};
  ScenarioConfig base;
  std::size_t threads = 0;  // 0: hardware concurrency
};

/// Parses a matrix spec (JSON). Throws Error(InvalidConfig).
MatrixSpec parse_matrix_spec(const std::string& json_text);
MatrixSpec load_matrix_spec(const std::filesystem::path& path);

/// Adversary from a preset name or a JSON policy file.
AdversaryPolicy load_adversary(const std::string& name_or_path);
AdversaryPolicy parse_adversary(const std::string& json_text);

/// Runs every cell (independent cells in parallel); rows come back in spec order.
std::vector<RunReport> run_matrix(const MatrixSpec& spec);

/// Comma-separated table: metrics_header() then one row per report.
std::string matrix_table(const std::vector<RunReport>& rows);

}  // namespace shieldrep::harness
