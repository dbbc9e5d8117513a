// shieldrep: run scenarios, check traces, run experiment matrices.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "shieldrep/core/error.hpp"
#include "shieldrep/harness/matrix.hpp"

using namespace shieldrep;

int main(int argc, char** argv) {
  CLI::App app{"Shielded replication protocols: simulation, checking and experiments"};
  app.require_subcommand(1);

  ScenarioConfig cfg;
  std::string protocol = "r-raft";
  std::string adversary = "identity";
  std::string workload = "ycsb";
  double zipf = cfg.workload.zipf_theta;
  std::string out_dir = "out";
  auto* run = app.add_subcommand("run", "Simulate one scenario and check it");
  run->add_option("--protocol", protocol, "r-abd | r-raft | r-cr | r-allconcur")
      ->capture_default_str();
  run->add_option("--nodes", cfg.n, "Replica count")->capture_default_str();
  run->add_option("--faults", cfg.f, "Tolerated crash faults")->capture_default_str();
  run->add_option("--adversary", adversary, "Preset name or JSON policy file")
      ->capture_default_str();
  run->add_option("--workload", workload, "Workload generator")
      ->check(CLI::IsMember({"ycsb"}))
      ->capture_default_str();
  run->add_option("--read-ratio", cfg.workload.read_ratio, "Fraction of reads")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  run->add_option("--value-size", cfg.workload.value_size, "Value bytes")->capture_default_str();
  run->add_option("--keys", cfg.workload.key_count, "Distinct keys")->capture_default_str();
  run->add_option("--zipf", zipf, "Zipf theta; 0 selects uniform keys")->capture_default_str();
  run->add_option("--ops", cfg.workload.op_count, "Operations")->capture_default_str();
  run->add_option("--clients", cfg.workload.client_count, "Closed-loop clients")
      ->capture_default_str();
  run->add_option("--seed", cfg.seed, "Seed")->capture_default_str();
  run->add_option("--gst", cfg.gst, "Global stabilization tick")->capture_default_str();
  run->add_option("--delta", cfg.delta, "Post-GST delivery bound (ticks)")->capture_default_str();
  run->add_option("--tick-budget", cfg.tick_budget, "Simulation tick budget")
      ->capture_default_str();
  run->add_flag("--confidential", cfg.confidential, "Encrypt payloads and stored values");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string trace_path;
  auto* check = app.add_subcommand("check", "Check a trace file");
  check->add_option("trace", trace_path, "Line-delimited trace")->required();

  std::string spec_path;
  std::string table_path;
  auto* matrix = app.add_subcommand("matrix", "Run a protocol x workload x adversary matrix");
  matrix->add_option("--spec", spec_path, "Matrix spec (JSON)")->required();
  matrix->add_option("--out", table_path, "Write the table here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto p = protocol_from_string(protocol);
      if (!p) throw Error(Errc::InvalidConfig, "unknown protocol " + protocol);
      cfg.protocol = *p;
      cfg.adversary = harness::load_adversary(adversary);
      if (zipf == 0.0) {
        cfg.workload.distribution = KeyDistribution::Uniform;
      } else {
        cfg.workload.zipf_theta = zipf;
      }
      const auto report = harness::run(cfg, out_dir);
      std::cout << harness::report_json(report) << '\n';
      std::cerr << harness::summarize(report.violations) << '\n';
      return report.passed() ? 0 : 1;
    }
    if (*check) {
      const auto v = harness::check_trace_file(trace_path);
      for (const auto& x : v) {
        std::cout << tracecheck::to_string(x.property) << ": " << x.detail << " ("
                  << x.witness.size() << " witness events)\n";
      }
      std::cout << harness::summarize(v) << '\n';
      return v.empty() ? 0 : 1;
    }
    if (*matrix) {
      const auto rows = harness::run_matrix(harness::load_matrix_spec(spec_path));
      const auto table = harness::matrix_table(rows);
      if (table_path.empty()) {
        std::cout << table;
      } else {
        std::ofstream(table_path) << table;
      }
      const bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.passed(); });
      return ok ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
