#include "shieldrep/harness/matrix.hpp"

#include <algorithm>
#include <fstream>
#include <atomic>
#include <future>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep::harness {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
}

ChannelFaults faults_from(const json& j) {
  ChannelFaults f;
  f.drop_prob = j.value("drop", 0.0);
  f.dup_prob = j.value("dup", 0.0);
  f.tamper_prob = j.value("tamper", 0.0);
  f.replay_prob = j.value("replay", 0.0);
  f.reorder_window = j.value("reorder_window", Tick{0});
  return f;
}

ChannelId channel_from(const json& j) {
  return ChannelId{NodeId{j.at("sender").get<std::uint32_t>()},
                   NodeId{j.at("receiver").get<std::uint32_t>()},
                   j.value("lane", std::uint16_t{0})};
}

void apply_base(ScenarioConfig& c, const json& b) {
  c.n = b.value("nodes", c.n);
  c.f = b.value("faults", c.f);
  c.gst = b.value("gst", c.gst);
  c.delta = b.value("delta", c.delta);
  c.confidential = b.value("confidential", c.confidential);
  c.tick_budget = b.value("tick_budget", c.tick_budget);
  c.window = b.value("window", c.window);
  c.batch = b.value("batch", c.batch);
  auto& w = c.workload;
  w.op_count = b.value("ops", w.op_count);
  w.client_count = b.value("clients", w.client_count);
  w.key_count = b.value("keys", w.key_count);
  w.value_size = b.value("value_size", w.value_size);
  if (b.contains("zipf")) {
    const double theta = b.at("zipf").get<double>();
    if (theta == 0.0) {
      w.distribution = KeyDistribution::Uniform;
    } else {
      w.distribution = KeyDistribution::Zipfian;
      w.zipf_theta = theta;
    }
  }
}

}  // namespace

AdversaryPolicy parse_adversary(const std::string& json_text) {
  const json j = parse(json_text);
  try {
    AdversaryPolicy p;
    p.name = j.value("name", std::string("custom"));
    if (j.contains("defaults")) p.defaults = faults_from(j.at("defaults"));
    for (const auto& c : j.value("channels", json::array())) {
      p.per_channel[channel_from(c)] = faults_from(c);
    }
    for (const auto& s : j.value("script", json::array())) {
      ScriptedAction a;
      a.at = s.at("at").get<Tick>();
      auto type = action_from_string(s.at("type").get<std::string>());
      if (!type) bad("unknown scripted action " + s.at("type").get<std::string>());
      a.type = *type;
      for (auto n : s.value("nodes", std::vector<std::uint32_t>{})) a.nodes.push_back(NodeId{n});
      if (s.contains("channel")) a.channel = channel_from(s.at("channel"));
      a.count = s.value("count", 1u);
      a.ticks = s.value("ticks", Tick{0});
      p.scripted.push_back(std::move(a));
    }
    std::stable_sort(p.scripted.begin(), p.scripted.end(),
                     [](const auto& a, const auto& b) { return a.at < b.at; });
    return p;
  } catch (const json::exception& e) {
    bad(std::string("bad adversary policy: ") + e.what());
  }
}

AdversaryPolicy load_adversary(const std::string& name_or_path) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(name_or_path, ec)) {
    return parse_adversary(slurp(name_or_path));
  }
  return preset_adversary(name_or_path);
}

MatrixSpec parse_matrix_spec(const std::string& json_text) {
  const json j = parse(json_text);
  MatrixSpec spec;
  try {
    for (const auto& p : j.at("protocols")) {
      auto proto = protocol_from_string(p.get<std::string>());
      if (!proto) bad("unknown protocol " + p.get<std::string>());
      spec.protocols.push_back(*proto);
    }
    spec.read_ratios = j.value("read_ratios", std::vector<double>{0.9});
    spec.adversaries = j.value("adversaries", std::vector<std::string>{"identity"});
    if (j.contains("seeds")) {
      spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else if (j.contains("seed_count")) {
      spec.seeds.clear();
      for (std::uint64_t s = 1; s <= j.at("seed_count").get<std::uint64_t>(); ++s) {
        spec.seeds.push_back(s);
      }
    }
    if (j.contains("base")) apply_base(spec.base, j.at("base"));
    spec.threads = j.value("threads", std::size_t{0});
  } catch (const json::exception& e) {
    bad(std::string("bad matrix spec: ") + e.what());
  }
  if (spec.protocols.empty() || spec.read_ratios.empty() || spec.adversaries.empty() ||
      spec.seeds.empty()) {
    bad("matrix spec has an empty dimension");
  }
  return spec;
}

MatrixSpec load_matrix_spec(const std::filesystem::path& path) {
  return parse_matrix_spec(slurp(path));
}

std::vector<RunReport> run_matrix(const MatrixSpec& spec) {
  std::vector<ScenarioConfig> cells;
  for (Protocol p : spec.protocols) {
    for (double rr : spec.read_ratios) {
      for (const auto& adv : spec.adversaries) {
        const AdversaryPolicy policy = load_adversary(adv);
        for (std::uint64_t seed : spec.seeds) {
          ScenarioConfig c = spec.base;
          c.protocol = p;
          c.workload.read_ratio = rr;
          c.adversary = policy;
          c.seed = seed;
          validate(c);
          cells.push_back(std::move(c));
        }
      }
    }
  }
  std::vector<RunReport> rows(cells.size());
  std::size_t threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
  threads = std::max<std::size_t>(1, std::min(threads, cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto ops = gen_workload(cells[i].workload, cells[i].seed);
      rows[i] = make_report(simulate(cells[i], ops), ops);
    }
  };
  std::vector<std::future<void>> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
  return rows;
}

std::string matrix_table(const std::vector<RunReport>& rows) {
  std::string out = metrics_header() + "\n";
  for (const auto& r : rows) out += metrics_row(r) + "\n";
  return out;
}

}  // namespace shieldrep::harness
