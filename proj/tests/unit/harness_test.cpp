#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "fixtures.hpp"
#include "shieldrep/core/error.hpp"
#include "shieldrep/harness/matrix.hpp"
#include "shieldrep/harness/report.hpp"
#include "shieldrep/harness/workload.hpp"

namespace shieldrep::harness {
namespace {

TEST(Workload, SameSeedSameStream) {
  WorkloadSpec s;
  s.op_count = 500;
  auto a = gen_workload(s, 3);
  auto b = gen_workload(s, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].key, b[i].key);
    EXPECT_EQ(a[i].value, b[i].value);
    EXPECT_EQ(a[i].op, b[i].op);
  }
  auto c = gen_workload(s, 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].key != c[i].key;
  EXPECT_TRUE(differs);
}

TEST(Workload, AllReadsMeansNoWrites) {
  WorkloadSpec s;
  s.read_ratio = 1.0;
  s.op_count = 1000;
  for (const auto& op : gen_workload(s, 1)) EXPECT_EQ(op.op, OpType::Get);
}

TEST(Workload, ReadFractionWithinOnePercent) {
  WorkloadSpec s;
  s.op_count = 20'000;
  for (double ratio : {0.5, 0.75, 0.9, 0.95, 0.99}) {
    s.read_ratio = ratio;
    std::size_t reads = 0;
    for (const auto& op : gen_workload(s, 9)) reads += op.op == OpType::Get;
    EXPECT_NEAR(static_cast<double>(reads) / s.op_count, ratio, 0.01) << ratio;
  }
}

TEST(Workload, ValuesAndClients) {
  WorkloadSpec s;
  s.op_count = 100;
  s.value_size = 64;
  s.client_count = 8;
  auto ops = gen_workload(s, 1);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    EXPECT_EQ(ops[i].client, i % 8);
    if (ops[i].op == OpType::Put) EXPECT_EQ(ops[i].value.size(), 64u);
  }
  EXPECT_EQ(key_name(42), to_bytes("user0000000042"));
}

TEST(Zipf, Normalizer) {
  // 1 + 2^-0.99 + 3^-0.99, summed by hand.
  const double three = 1.0 + std::pow(2.0, -0.99) + std::pow(3.0, -0.99);
  EXPECT_DOUBLE_EQ(zeta(3, 0.99), three);
  EXPECT_NEAR(zeta(10'000, 0.99), 10.2243614596, 1e-8);
}

TEST(Zipf, TopKeyMassMatchesAnalytic) {
  // Reference: 1 / sum_{i=1..10000} i^-0.99, computed independently.
  constexpr double kTop1 = 0.0978056188596;
  ZipfianGenerator z(10'000, 0.99);
  EXPECT_NEAR(z.mass(0), kTop1, 1e-9);
  std::mt19937_64 rng(12345);
  std::size_t hits = 0;
  constexpr std::size_t kDraws = 100'000;
  for (std::size_t i = 0; i < kDraws; ++i) hits += z.next(rng) == 0;
  const double freq = static_cast<double>(hits) / kDraws;
  EXPECT_NEAR(freq, kTop1, 0.1 * kTop1);
}

TEST(Zipf, RanksStayInRange) {
  ZipfianGenerator z(10, 0.5);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10'000; ++i) EXPECT_LT(z.next(rng), 10u);
}

ScenarioConfig run_config(Protocol p, std::string_view adversary, std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.protocol = p;
  c.seed = seed;
  c.gst = 300;
  c.adversary = preset_adversary(adversary);
  c.workload.op_count = 60;
  c.workload.key_count = 100;
  c.workload.value_size = 32;
  return c;
}

TEST(Simulate, BenignAbdCommitsEverythingWithoutRejects) {
  auto cfg = run_config(Protocol::Abd, "identity");
  cfg.gst = 0;
  cfg.workload.op_count = 100;
  const auto ops = gen_workload(cfg.workload, cfg.seed);
  const auto res = simulate(cfg, ops);
  EXPECT_EQ(res.completed, 100u);
  EXPECT_FALSE(res.budget_exhausted);
  auto rep = make_report(res, ops);
  EXPECT_EQ(rep.rejected_total(), 0u);
  EXPECT_TRUE(rep.passed()) << summarize(rep.violations);
}

TEST(Simulate, BenignChainReportIsClean) {
  auto cfg = run_config(Protocol::Chain, "identity");
  const auto ops = gen_workload(cfg.workload, cfg.seed);
  auto rep = make_report(simulate(cfg, ops), ops);
  EXPECT_TRUE(rep.passed()) << summarize(rep.violations);
  EXPECT_EQ(rep.committed_ops, 60u);
  EXPECT_LE(rep.committed_ops, rep.op_count);
}

TEST(Simulate, AdversarialRunRejectsButStaysSafe) {
  for (auto adv : {"tamper", "replay"}) {
    auto cfg = run_config(Protocol::Raft, adv);
    const auto ops = gen_workload(cfg.workload, cfg.seed);
    auto rep = make_report(simulate(cfg, ops), ops);
    EXPECT_TRUE(rep.passed()) << adv << ": " << summarize(rep.violations);
    EXPECT_GT(rep.rejected_total(), 0u) << adv;
  }
}

TEST(Simulate, ScheduledJoinAndCrash) {
  auto cfg = run_config(Protocol::Abd, "identity");
  cfg.gst = 0;
  cfg.joins.push_back(JoinSpec{20, NodeId{0}, true, true, std::nullopt});
  cfg.joins.push_back(JoinSpec{30, NodeId{0}, false, true, std::nullopt});
  const auto ops = gen_workload(cfg.workload, cfg.seed);
  auto res = simulate(cfg, ops);
  ASSERT_EQ(res.joins.size(), 2u);
  EXPECT_TRUE(res.joins[0].admitted);
  EXPECT_FALSE(res.joins[1].admitted);
  EXPECT_EQ(res.members.size(), 4u);
  EXPECT_TRUE(make_report(res, ops).passed());
}

TEST(Simulate, InvalidConfigThrows) {
  ScenarioConfig c;
  c.n = 2;
  EXPECT_THROW(simulate(c, {}), Error);
  EXPECT_THROW(preset_adversary("nonsense"), Error);
}

TEST(Report, FilesAndCheck) {
  const auto dir = std::filesystem::temp_directory_path() / "shieldrep_report_test";
  std::filesystem::remove_all(dir);
  auto cfg = run_config(Protocol::Raft, "reorder");
  auto rep = run(cfg, dir);
  EXPECT_TRUE(rep.passed());
  ASSERT_TRUE(std::filesystem::exists(dir / "trace.jsonl"));
  ASSERT_TRUE(std::filesystem::exists(dir / "report.json"));
  std::ifstream m(dir / "metrics.csv");
  std::string header;
  std::getline(m, header);
  EXPECT_EQ(header, metrics_header());
  EXPECT_TRUE(check_trace_file(dir / "trace.jsonl").empty());
  std::filesystem::remove_all(dir);
}

TEST(Report, JsonHasFixedFields) {
  RunReport r;
  r.protocol = "R-Raft";
  r.rejected_msgs["BadMac"] = 3;
  const auto j = report_json(r);
  for (auto field : {"committed_ops", "rejected_msgs", "ops_per_tick", "rounds_per_write",
                     "message_count", "bytes_on_wire", "violations"}) {
    EXPECT_NE(j.find(field), std::string::npos) << field;
  }
  EXPECT_EQ(r.rejected_total(), 3u);
}

TEST(Matrix, SpecParsing) {
  auto spec = parse_matrix_spec(R"({
    "protocols": ["r-abd", "r-cr"], "read_ratios": [0.5, 0.9],
    "adversaries": ["identity"], "seed_count": 2,
    "base": {"ops": 20, "keys": 50, "value_size": 16, "zipf": 0}
  })");
  EXPECT_EQ(spec.protocols.size(), 2u);
  EXPECT_EQ(spec.read_ratios.size(), 2u);
  EXPECT_EQ(spec.seeds.size(), 2u);
  EXPECT_EQ(spec.base.workload.distribution, KeyDistribution::Uniform);
  EXPECT_THROW(parse_matrix_spec(R"({"protocols": ["pbft"]})"), Error);
  EXPECT_THROW(parse_matrix_spec("{"), Error);
}

TEST(Matrix, AdversaryPolicyParsing) {
  auto p = parse_adversary(R"({
    "name": "custom", "defaults": {"drop": 0.1, "reorder_window": 4},
    "channels": [{"sender": 0, "receiver": 1, "tamper": 0.5}],
    "script": [{"at": 10, "type": "Partition", "nodes": [0]}, {"at": 50, "type": "Heal"}]
  })");
  EXPECT_EQ(p.name, "custom");
  EXPECT_DOUBLE_EQ(p.defaults.drop_prob, 0.1);
  EXPECT_EQ(p.defaults.reorder_window, 4u);
  EXPECT_DOUBLE_EQ(p.faults_for(ChannelId{NodeId{0}, NodeId{1}, 0}).tamper_prob, 0.5);
  ASSERT_EQ(p.scripted.size(), 2u);
  EXPECT_EQ(p.scripted[0].type, ActionType::Partition);
  EXPECT_EQ(load_adversary("drop").defaults.drop_prob, 0.2);
}

TEST(Matrix, BenignMatrixIsCleanAndDeterministic) {
  MatrixSpec spec;
  spec.protocols = {Protocol::Abd, Protocol::Raft, Protocol::Chain, Protocol::AllConcur};
  spec.read_ratios = {0.5, 0.75, 0.9, 0.95, 0.99};
  spec.adversaries = {"identity"};
  spec.base.workload.op_count = 40;
  spec.base.workload.key_count = 100;
  spec.base.workload.value_size = 32;
  auto rows = run_matrix(spec);
  ASSERT_EQ(rows.size(), 20u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.passed()) << r.protocol << " " << r.read_ratio;
    EXPECT_EQ(r.committed_ops, r.op_count);
  }
  EXPECT_EQ(matrix_table(rows), matrix_table(run_matrix(spec)));
}

}  // namespace
}  // namespace shieldrep::harness
