#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "shieldrep/harness/scenario.hpp"

namespace shieldrep::harness {

struct RunReport {
  std::string protocol;
  std::string adversary;
  std::size_t nodes = 0;
  std::size_t faults = 0;
  std::uint64_t seed = 0;
  double read_ratio = 0.0;
  std::size_t value_size = 0;
  std::size_t op_count = 0;
  std::size_t committed_ops = 0;
  Tick ticks = 0;
  double ops_per_tick = 0.0;
  std::map<std::string, std::uint64_t> rejected_msgs;
  double rounds_per_write = 0.0;
  double rounds_per_read = 0.0;
  double hops_per_write = 0.0;
  std::uint64_t message_count = 0;
  std::uint64_t frames = 0;
  std::uint64_t bytes_on_wire = 0;
  std::vector<tracecheck::Violation> violations;

  bool passed() const { return violations.empty(); }
  std::uint64_t rejected_total() const;
};

/// Every applicable checker over one run: message properties (shielded runs),
/// agreement, view monotonicity, lease exclusion, linearizability (sequential
/// consistency for R-AllConcur) and, in confidential mode, a plaintext scan.
std::vector<tracecheck::Violation> check_run(const SimulationResult& result,
                                             const std::vector<Operation>& ops);

RunReport make_report(const SimulationResult& result, const std::vector<Operation>& ops);

std::string report_json(const RunReport& report);
/// Fixed header row of the metrics table.
std::string metrics_header();
std::string metrics_row(const RunReport& report);

/// Generates the workload, simulates, checks, and writes trace.jsonl,
/// report.json and metrics.csv into `out_dir` (created if missing).
RunReport run(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Loads a trace file and runs the trace-only message checkers.
std::vector<tracecheck::Violation> check_trace_file(const std::filesystem::path& path);

/// Human-readable one-paragraph summary.
std::string summarize(const std::vector<tracecheck::Violation>& violations);

}  // namespace shieldrep::harness
