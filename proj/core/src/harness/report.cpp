#include "shieldrep/harness/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep::harness {

using tracecheck::Property;
using tracecheck::Violation;

std::uint64_t RunReport::rejected_total() const {
  std::uint64_t n = 0;
  for (const auto& [r, c] : rejected_msgs) n += c;
  return n;
}

std::vector<Violation> check_run(const SimulationResult& result,
                                 const std::vector<Operation>& ops) {
  std::vector<Violation> out;
  auto add = [&out](std::vector<Violation> vs) {
    for (auto& v : vs) out.push_back(std::move(v));
  };
  const auto& cfg = result.config;
  if (cfg.shielded) add(tracecheck::check_messages(result.trace));
  add(tracecheck::check_agreement(result.trace,
                                  cfg.protocol == Protocol::Abd
                                      ? tracecheck::AgreementMode::PerKey
                                      : tracecheck::AgreementMode::TotalOrder,
                                  result.faulty));
  add(tracecheck::check_view_monotonic(result.trace));
  add(tracecheck::check_lease_exclusion(result.leases));
  try {
    const auto verdict = cfg.protocol == Protocol::AllConcur
                             ? tracecheck::check_sequential(result.history)
                             : tracecheck::check_linearizable(result.history);
    if (!verdict.ok) out.push_back(Violation{Property::Linearizability, verdict.detail, {}});
  } catch (const Error& e) {
    out.push_back(Violation{Property::Linearizability, e.what(), {}});
  }
  if (cfg.confidential && !result.wire.empty()) {
    std::vector<Bytes> hay;
    for (const auto& w : result.wire) hay.push_back(w.frame);
    for (const auto& a : result.arenas) hay.push_back(a);
    std::vector<Bytes> needles = result.released_keys;
    for (const auto& op : ops) {
      if (op.op == OpType::Put && op.value.size() >= 16) needles.push_back(op.value);
    }
    add(tracecheck::check_secrets(hay, needles));
  }
  return out;
}

RunReport make_report(const SimulationResult& result, const std::vector<Operation>& ops) {
  const auto& cfg = result.config;
  RunReport r;
  r.protocol = std::string(to_string(cfg.protocol));
  r.adversary = cfg.adversary.name;
  r.nodes = cfg.n;
  r.faults = cfg.f;
  r.seed = cfg.seed;
  r.read_ratio = cfg.workload.read_ratio;
  r.value_size = cfg.workload.value_size;
  r.op_count = result.op_count;
  r.committed_ops = result.completed;
  r.ticks = result.ticks;
  r.ops_per_tick = r.ticks ? static_cast<double>(r.committed_ops) / static_cast<double>(r.ticks) : 0;
  for (const auto& e : result.trace) {
    if (e.kind == EventKind::Reject) ++r.rejected_msgs[e.reason];
  }
  std::size_t writes = 0, reads = 0;
  std::uint64_t wr = 0, rr = 0, hops = 0;
  for (const auto& h : result.history) {
    if (!h.completed) continue;
    auto it = result.metrics.find(protocols::OpKey{h.client, h.rid});
    const protocols::OpStats s = it == result.metrics.end() ? protocols::OpStats{} : it->second;
    if (h.op == OpType::Put) {
      ++writes;
      wr += s.broadcast_rounds;
      hops += s.forward_hops + s.ack_hops;
    } else {
      ++reads;
      rr += s.broadcast_rounds;
    }
  }
  auto avg = [](std::uint64_t sum, std::size_t n) {
    return n ? static_cast<double>(sum) / static_cast<double>(n) : 0.0;
  };
  r.rounds_per_write = avg(wr, writes);
  r.rounds_per_read = avg(rr, reads);
  r.hops_per_write = avg(hops, writes);
  r.message_count = result.messages;
  r.frames = result.frames;
  r.bytes_on_wire = result.wire_bytes;
  r.violations = check_run(result, ops);
  return r;
}

std::string report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["protocol"] = r.protocol;
  j["adversary"] = r.adversary;
  j["nodes"] = r.nodes;
  j["faults"] = r.faults;
  j["seed"] = r.seed;
  j["read_ratio"] = r.read_ratio;
  j["value_size"] = r.value_size;
  j["op_count"] = r.op_count;
  j["committed_ops"] = r.committed_ops;
  j["ticks"] = r.ticks;
  j["ops_per_tick"] = r.ops_per_tick;
  j["rejected_msgs"] = r.rejected_msgs;
  j["rounds_per_write"] = r.rounds_per_write;
  j["rounds_per_read"] = r.rounds_per_read;
  j["hops_per_write"] = r.hops_per_write;
  j["message_count"] = r.message_count;
  j["frames"] = r.frames;
  j["bytes_on_wire"] = r.bytes_on_wire;
  auto vs = nlohmann::ordered_json::array();
  for (const auto& v : r.violations) {
    vs.push_back({{"property", std::string(tracecheck::to_string(v.property))},
                  {"detail", v.detail},
                  {"witness_events", v.witness.size()}});
  }
  j["violations"] = vs;
  return j.dump(2);
}

std::string metrics_header() {
  return "protocol,adversary,nodes,faults,seed,read_ratio,value_size,ops,committed,ticks,"
         "ops_per_tick,rounds_per_write,rounds_per_read,hops_per_write,messages,frames,bytes,"
         "rejected,violations";
}

std::string metrics_row(const RunReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << r.protocol << ',' << r.adversary << ',' << r.nodes << ',' << r.faults << ',' << r.seed
     << ',' << r.read_ratio << ',' << r.value_size << ',' << r.op_count << ','
     << r.committed_ops << ',' << r.ticks << ',' << r.ops_per_tick << ',' << r.rounds_per_write
     << ',' << r.rounds_per_read << ',' << r.hops_per_write << ',' << r.message_count << ','
     << r.frames << ',' << r.bytes_on_wire << ',' << r.rejected_total() << ','
     << r.violations.size();
  return os.str();
}

RunReport run(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  const auto ops = gen_workload(config.workload, config.seed);
  const auto result = simulate(config, ops, /*record_wire=*/config.confidential);
  RunReport report = make_report(result, ops);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + out_dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw Error(Errc::Io, "cannot write " + (out_dir / name).string());
    return f;
  };
  {
    auto f = open("trace.jsonl");
    write_trace(f, result.trace);
  }
  {
    auto f = open("report.json");
    f << report_json(report) << '\n';
  }
  {
    auto f = open("metrics.csv");
    f << metrics_header() << '\n' << metrics_row(report) << '\n';
  }
  return report;
}

std::vector<Violation> check_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  const auto events = read_trace(in);
  auto out = tracecheck::check_messages(events);
  for (auto& v : tracecheck::check_view_monotonic(events)) out.push_back(std::move(v));
  return out;
}

std::string summarize(const std::vector<Violation>& violations) {
  if (violations.empty()) return "no violations";
  std::map<std::string_view, std::size_t> by;
  for (const auto& v : violations) ++by[tracecheck::to_string(v.property)];
  std::ostringstream os;
  os << violations.size() << " violation(s):";
  for (const auto& [p, n] : by) os << ' ' << p << '=' << n;
  os << "; first: " << violations.front().detail;
  return os.str();
}

}  // namespace shieldrep::harness
