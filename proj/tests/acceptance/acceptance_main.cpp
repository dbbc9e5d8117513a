// Acceptance gate: one PASS/FAIL line per criterion; exit status 0 iff all pass.
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "fixtures.hpp"
#include "shieldrep/core/error.hpp"
#include "shieldrep/core/quorum.hpp"
#include "shieldrep/harness/report.hpp"
#include "shieldrep/protocols/chain.hpp"
#include "shieldrep/protocols/raft.hpp"
#include "shieldrep/tracecheck/history.hpp"

namespace shieldrep {
namespace {

using harness::Cluster;
using testing::get;
using testing::put;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (out_.pass) out_.detail = what;
    out_.pass = false;
  }
  void note(const std::string& s) {
    if (out_.pass) out_.detail = s;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

constexpr Protocol kAll[] = {Protocol::Abd, Protocol::Raft, Protocol::Chain, Protocol::AllConcur};

std::string name(Protocol p) { return std::string(to_string(p)); }

template <class T>
std::vector<T> parallel(std::size_t n, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<void>> workers;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i; (i = next++) < n;) out[i] = fn(i);
    }));
  }
  for (auto& w : workers) w.get();
  return out;
}

// 1. Every shield/verify branch plus single-bit-flip fuzz.
Outcome shield_verify() {
  Check c;
  testing::CorePair p;
  std::vector<ShieldedMessage> m;
  for (int i = 0; i < 7; ++i) m.push_back(p.a.shield_request(to_bytes("x"), p.ab, MessageKind{0x100}));
  c.expect(m[0].meta.tuple.cnt == 1 && m[1].meta.tuple.cnt == 2, "counters must start at 1");
  for (int i = 0; i < 4; ++i) c.expect(std::holds_alternative<tcb::AcceptNow>(p.b.verify_request(m[i])), "next accepted");
  c.expect(p.b.recv_counter(p.ab) == 4, "rcnt after 4 accepts");
  auto stale = p.b.verify_request(m[2]);
  c.expect(std::holds_alternative<tcb::Reject>(stale) &&
               std::get<tcb::Reject>(stale).reason == tcb::RejectReason::StaleCounter,
           "replay must be StaleCounter");
  c.expect(std::holds_alternative<tcb::BufferFuture>(p.b.verify_request(m[6])), "cnt 7 buffered");
  c.expect(std::holds_alternative<tcb::BufferFuture>(p.b.verify_request(m[5])), "cnt 6 buffered");
  c.expect(p.b.drain_ready(p.ab).empty(), "gap must block drain");
  c.expect(std::holds_alternative<tcb::AcceptNow>(p.b.verify_request(m[4])) &&
               p.b.recv_counter(p.ab) == 5,
           "cnt 5 accepted, rcnt 5");
  c.expect(p.b.drain_ready(p.ab).size() == 2 && p.b.recv_counter(p.ab) == 7, "drain to rcnt 7");
  auto forged = p.a.shield_request(to_bytes("y"), p.ab, MessageKind{0x100});
  forged.mac[0] ^= 1;
  auto bad = p.b.verify_request(forged);
  c.expect(std::holds_alternative<tcb::Reject>(bad) &&
               std::get<tcb::Reject>(bad).reason == tcb::RejectReason::BadMac,
           "bad MAC rejected");

  std::mt19937_64 rng(2024);
  testing::CorePair f;
  std::size_t rejected = 0;
  constexpr std::size_t kFuzz = 10'000;
  for (std::size_t i = 0; i < kFuzz; ++i) {
    Bytes payload(1 + rng() % 128);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    auto msg = f.a.shield_request(payload, f.ab, MessageKind{0x100});
    auto wire = canonical_encode(msg);
    const std::size_t bit = rng() % (wire.size() * 8);
    wire[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    rejected += std::holds_alternative<tcb::Reject>(f.b.verify_frame(wire));
    f.b.verify_request(msg);
  }
  c.expect(rejected == kFuzz, std::to_string(kFuzz - rejected) + " flipped messages accepted");
  c.note("10000/10000 bit flips rejected");
  return c.result();
}

// 2. Message properties over the adversary suite, plus the violating corpus.
Outcome message_properties() {
  Check c;
  const std::vector<std::string> suite{"identity", "drop", "reorder", "replay", "tamper",
                                       "leader-partition"};
  constexpr std::size_t kSeeds = 20;
  const std::size_t cells = std::size(kAll) * suite.size() * kSeeds;
  struct Cell {
    std::size_t violations = 0;
    std::uint64_t rejects = 0;
    std::string what;
  };
  auto res = parallel<Cell>(cells, [&](std::size_t i) {
    ScenarioConfig cfg;
    cfg.protocol = kAll[i / (suite.size() * kSeeds)];
    cfg.adversary = harness::preset_adversary(suite[(i / kSeeds) % suite.size()]);
    cfg.seed = 1 + i % kSeeds;
    cfg.n = 3;
    cfg.f = 1;
    cfg.gst = 300;
    cfg.workload.op_count = 60;
    cfg.workload.key_count = 100;
    cfg.workload.value_size = 32;
    const auto ops = harness::gen_workload(cfg.workload, cfg.seed);
    const auto r = harness::simulate(cfg, ops);
    Cell out;
    auto v = tracecheck::check_messages(r.trace);
    out.violations = v.size();
    for (const auto& e : r.trace) out.rejects += e.kind == EventKind::Reject;
    if (!v.empty()) {
      out.what = name(cfg.protocol) + "/" + cfg.adversary.name + "/seed " +
                 std::to_string(cfg.seed) + ": " + harness::summarize(v);
    }
    return out;
  });
  std::size_t total = 0;
  std::uint64_t rejects = 0;
  for (const auto& r : res) {
    total += r.violations;
    rejects += r.rejects;
    c.expect(r.violations == 0, r.what);
  }
  namespace corpus = testing::corpus;
  c.expect(tracecheck::check_messages(corpus::accept_without_send()).size() == 1, "origin corpus");
  c.expect(tracecheck::check_messages(corpus::swapped_accepts()).size() == 1, "order corpus");
  c.expect(tracecheck::check_messages(corpus::duplicate_accept()).size() == 1, "nodup corpus");
  c.expect(tracecheck::check_agreement(corpus::divergent_commits(),
                                       tracecheck::AgreementMode::TotalOrder)
                   .size() == 1,
           "agreement corpus");
  c.expect(tracecheck::check_view_monotonic(corpus::repeated_view()).size() == 1, "view corpus");
  c.expect(tracecheck::check_lease_exclusion(corpus::two_lease_holders()).size() == 1,
           "lease corpus");
  c.expect(!tracecheck::check_linearizable(corpus::interleaved_reads()).ok,
           "linearizability corpus");
  c.note(std::to_string(cells) + " runs, " + std::to_string(total) + " violations, " +
         std::to_string(rejects) + " rejected frames; corpus flagged");
  return c.result();
}

// 3. Linearizability (sequential consistency for local reads).
Outcome consistency() {
  Check c;
  const std::vector<std::string> advs{"identity", "reorder"};
  struct Cell {
    bool ok = false;
    std::size_t completed = 0;
    std::string what;
  };
  auto res = parallel<Cell>(std::size(kAll) * advs.size(), [&](std::size_t i) {
    ScenarioConfig cfg;
    cfg.protocol = kAll[i / advs.size()];
    cfg.adversary = harness::preset_adversary(advs[i % advs.size()]);
    cfg.seed = 3;
    cfg.gst = 300;
    cfg.workload.op_count = 500;
    cfg.workload.client_count = 8;
    cfg.workload.key_count = 50;
    cfg.workload.read_ratio = 0.5;
    cfg.workload.value_size = 32;
    const auto ops = harness::gen_workload(cfg.workload, cfg.seed);
    const auto r = harness::simulate(cfg, ops);
    Cell out;
    out.completed = r.completed;
    try {
      auto verdict = cfg.protocol == Protocol::AllConcur ? tracecheck::check_sequential(r.history)
                                                         : tracecheck::check_linearizable(r.history);
      out.ok = verdict.ok && r.history.size() == 500;
      out.what = name(cfg.protocol) + "/" + cfg.adversary.name + ": " + verdict.detail;
    } catch (const Error& e) {
      out.what = name(cfg.protocol) + "/" + cfg.adversary.name + ": " + e.what();
    }
    return out;
  });
  std::size_t completed = 0;
  for (const auto& r : res) {
    c.expect(r.ok, r.what);
    completed += r.completed;
  }
  c.note("8 histories of 500 ops (" + std::to_string(completed) + " completed) pass");
  return c.result();
}

ScenarioConfig crash_config(Protocol p) {
  auto cfg = testing::small_config(p, 11);
  cfg.workload.client_count = 2;
  return cfg;
}

bool committed(const std::optional<protocols::Outcome>& o) { return o && o->completed; }

// 4. Liveness under one crash.
Outcome crash_tolerance() {
  Check c;
  std::size_t reread = 0;
  Tick failover = 0;
  {
    Cluster cl(crash_config(Protocol::Raft));
    c.expect(committed(cl.run_op(0, put("a", "1"), 2000)), "raft: initial write");
    cl.crash(NodeId{2});
    for (int i = 0; i < 5; ++i) {
      c.expect(committed(cl.run_op(0, put("f" + std::to_string(i), "v"), 2000)),
               "raft: commit after follower crash");
    }
  }
  {
    auto cfg = crash_config(Protocol::Raft);
    cfg.gst = 300;
    cfg.adversary.scripted.push_back(ScriptedAction{200, ActionType::CrashTee, {NodeId{0}}});
    Cluster cl(cfg);
    std::map<std::string, std::string> before;
    for (int i = 0; cl.now() < 150; ++i) {
      const std::string k = "k" + std::to_string(i), v = "v" + std::to_string(i);
      if (committed(cl.run_op(0, put(k, v), 100))) before[k] = v;
    }
    cl.run_until([&] { return cl.replica(NodeId{0}) == nullptr; }, 200);
    c.expect(cl.replica(NodeId{0}) == nullptr, "raft: leader crash was scheduled");
    const auto crash_seq = cl.trace().size();
    auto elected = [&] {
      for (std::size_t i = crash_seq; i < cl.trace().size(); ++i) {
        const auto& e = cl.trace().events()[i];
        if (e.kind == EventKind::ViewChange && e.view > 1) return true;
      }
      return false;
    };
    const Tick crashed_at = cl.now();
    c.expect(cl.run_until(elected, 2000), "raft: no view change after leader crash");
    failover = cl.now() - crashed_at;
    cl.run_until([&] { return cl.now() >= cfg.gst; }, 1000);
    c.expect(committed(cl.run_op(0, put("after", "gst"), 3000)), "raft: post-GST write");
    for (const auto& [k, v] : before) {
      auto o = cl.run_op(1, get(k), 3000);
      c.expect(committed(o) && o->value == to_bytes(v), "raft: lost committed key " + k);
      reread += committed(o) && o->value == to_bytes(v);
    }
    c.expect(!before.empty(), "raft: nothing committed before the crash");
  }
  for (std::uint32_t victim = 0; victim < 3; ++victim) {
    Cluster cl(crash_config(Protocol::Abd));
    c.expect(committed(cl.run_op(0, put("a", "1"), 2000)), "abd: initial write");
    cl.crash(NodeId{victim});
    c.expect(committed(cl.run_op(0, put("b", "2"), 2000)), "abd: write after crash");
    auto o = cl.run_op(1, get("a"), 2000);
    c.expect(committed(o) && o->value == to_bytes("1"), "abd: read after crash");
  }
  {
    Cluster cl(crash_config(Protocol::Chain));
    c.expect(committed(cl.run_op(0, put("a", "1"), 2000)), "cr: initial write");
    cl.crash(NodeId{1});
    c.expect(cl.run_until([&] { return !cl.cas().is_member(NodeId{1}); }, 3000), "cr: no excision");
    c.expect(cl.members() == std::vector<NodeId>{NodeId{0}, NodeId{2}}, "cr: chain not relinked");
    c.expect(committed(cl.run_op(0, put("b", "2"), 3000)), "cr: write after relink");
    auto o = cl.run_op(1, get("a"), 3000);
    c.expect(committed(o) && o->value == to_bytes("1"), "cr: read after relink");
  }
  {
    Cluster cl(crash_config(Protocol::AllConcur));
    c.expect(committed(cl.run_op(0, put("a", "1"), 2000)), "allconcur: initial write");
    cl.crash(NodeId{2});
    c.expect(committed(cl.run_op(0, put("b", "2"), 3000)), "allconcur: round without crashed node");
    c.expect(!cl.cas().is_member(NodeId{2}), "allconcur: crashed node still a contributor");
  }
  c.note("raft leader failover in " + std::to_string(failover) + " ticks, " +
         std::to_string(reread) + " pre-crash keys intact; abd x3, cr relink, allconcur");
  return c.result();
}

// 5. Attestation gate and fresh ids.
Outcome attestation_gate() {
  Check c;
  std::size_t injected_rejects = 0;
  {
    Cluster cl(testing::small_config(Protocol::Raft));
    const auto keys = cl.cas().released_keys().size();
    auto wrong = cl.join(NodeId{0}, /*genuine=*/false);
    auto keyless = cl.join(NodeId{0}, true, /*has_hw_key=*/false);
    c.expect(!wrong.admitted && !keyless.admitted, "unattested join admitted");
    c.expect(cl.cas().released_keys().size() == keys, "key material released to unattested node");
    c.expect(!cl.cas().is_attested(wrong.id) && !cl.cas().is_attested(keyless.id),
             "unattested id recorded");

    // Injected frames: an unknown sender, and an impersonation of node 1 under a guessed key.
    const NodeId attacker{99};
    for (NodeId from : {attacker, NodeId{1}}) {
      tcb::TrustedCore fake(from, {}, nullptr);
      const ChannelId cq{from, NodeId{0}, 0};
      fake.install_channel(cq, testing::channel_keys("guess"));
      for (int i = 0; i < 5; ++i) fake.shield_request(to_bytes("x"), cq, protocols::kRaftAppend);
      auto msg = fake.shield_request(to_bytes("inject"), cq, protocols::kRaftAppend);
      msg.meta.tuple.cnt = 1'000'000;
      Bytes frame{1};
      auto enc = canonical_encode(msg);
      frame.insert(frame.end(), enc.begin(), enc.end());
      cl.network().transmit(cq, frame);
    }
    const auto mark = cl.trace().size();
    cl.run_until([] { return false; }, 50);
    std::size_t rejects = 0, accepts_from_attacker = 0;
    for (std::size_t i = mark; i < cl.trace().size(); ++i) {
      const auto& e = cl.trace().events()[i];
      if (e.kind == EventKind::Reject && e.node == NodeId{0} && e.reason == "BadMac") ++rejects;
      if (e.kind == EventKind::Accept && e.channel && e.channel->sender == attacker) ++accepts_from_attacker;
    }
    c.expect(rejects >= 2, "injected frames not rejected");
    injected_rejects = rejects;
    c.expect(accepts_from_attacker == 0, "injected frame accepted");
    c.expect(tracecheck::check_messages(cl.trace().events()).empty(), "message properties");
    std::set<NodeId> trusted;
    for (const auto& e : cl.trace().events()) {
      if (e.kind == EventKind::Trusted) trusted.insert(e.node);
    }
    c.expect(trusted == std::set<NodeId>{NodeId{0}, NodeId{1}, NodeId{2}},
             "Trusted event for a node that was never admitted");
  }
  {
    Cluster cl(testing::small_config(Protocol::Chain));
    std::set<NodeId> ids{NodeId{0}, NodeId{1}, NodeId{2}};
    NodeId last{2};
    std::size_t cycles = 0;
    for (int cycle = 0; cycle < 10; ++cycle) {
      const NodeId tail = cl.members().back();
      auto j = cl.join(tail);
      c.expect(j.admitted, "cycle " + std::to_string(cycle) + ": join denied: " + j.reason);
      if (!j.admitted) break;
      c.expect(ids.insert(j.id).second && j.id > last, "NodeId reused");
      last = j.id;
      c.expect(cl.run_until([&] { return cl.cas().is_member(j.id) && !cl.replica(j.id)->joining(); }, 3000),
               "joiner never synced");
      c.expect(committed(cl.run_op(0, put("c" + std::to_string(cycle), "v"), 3000)), "write after join");
      cl.crash(j.id);
      ++cycles;
      c.expect(cl.run_until([&] { return !cl.cas().is_member(j.id); }, 3000), "crashed joiner not excised");
    }
    c.note("2 unattested joins denied, " + std::to_string(injected_rejects) +
           " injected frames rejected, " + std::to_string(cycles) + " rejoin cycles (last id " +
           std::to_string(last.value) + ")");
  }
  return c.result();
}

// 6. Store integrity and confidentiality.
Outcome kv_integrity() {
  Check c;
  std::mt19937_64 rng(6);
  kvstore::Store s(256);
  for (int i = 0; i < 100; ++i) {
    Bytes v(32);
    for (auto& b : v) b = static_cast<std::uint8_t>(rng());
    s.write(to_bytes("k" + std::to_string(i)), v, {1, NodeId{0}});
  }
  auto arena = s.arena();
  std::size_t detected = 0, live = 0;
  for (int i = 0; i < 1000; ++i) {
    // Only flips inside a live value slot are observable through get.
    std::size_t pos = 0;
    Bytes hit;
    do {
      pos = rng() % arena.size();
      arena[pos] ^= 1;
      hit.clear();
      for (const auto& k : s.keys()) {
        try {
          s.get(k);
        } catch (const Error& e) {
          if (e.code() == Errc::IntegrityViolation) hit = k;
        }
      }
      if (hit.empty()) arena[pos] ^= 1;
    } while (hit.empty());
    ++live;
    try {
      s.get(hit);
    } catch (const Error& e) {
      detected += e.code() == Errc::IntegrityViolation;
    }
    arena[pos] ^= 1;
  }
  c.expect(detected == live && live == 1000, std::to_string(live - detected) + " flips undetected");

  for (Protocol p : kAll) {
    ScenarioConfig cfg;
    cfg.protocol = p;
    cfg.confidential = true;
    cfg.seed = 6;
    cfg.workload.op_count = 100;
    cfg.workload.value_size = 32;
    cfg.workload.read_ratio = 0.5;
    const auto ops = harness::gen_workload(cfg.workload, cfg.seed);
    const auto r = harness::simulate(cfg, ops, /*record_wire=*/true);
    std::vector<Bytes> hay = r.arenas;
    for (const auto& w : r.wire) hay.push_back(w.frame);
    std::vector<Bytes> needles;
    for (const auto& op : ops) {
      if (op.op == OpType::Put) needles.push_back(op.value);
    }
    c.expect(!r.wire.empty() && !needles.empty(), name(p) + ": nothing captured");
    auto leaks = tracecheck::check_secrets(hay, needles);
    c.expect(leaks.empty(), name(p) + ": plaintext value found: " + harness::summarize(leaks));
    auto key_leaks = tracecheck::check_secrets(hay, r.released_keys);
    c.expect(key_leaks.empty(), name(p) + ": key material found on the wire");
  }
  c.note("1000/1000 arena flips detected; no plaintext in arenas or wire (4 protocols)");
  return c.result();
}

struct CommitRecord {
  Tick at;
  NodeId node;
  std::uint64_t index;
  ClientId client;
  RequestId rid;
  Bytes key;
  std::optional<Digest> digest;
  friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

std::vector<CommitRecord> committed_history(const std::vector<TraceEvent>& trace) {
  std::vector<CommitRecord> out;
  for (const auto& e : trace) {
    if (e.kind == EventKind::Commit) out.push_back({e.at, e.node, e.cnt, e.client, e.rid, e.key, e.digest});
  }
  return out;
}

// 7. Shielded vs unshielded reference on the same schedule.
Outcome benign_equivalence() {
  Check c;
  std::size_t compared = 0;
  for (Protocol p : kAll) {
    ScenarioConfig cfg;
    cfg.protocol = p;
    cfg.seed = 7;
    cfg.workload.op_count = 200;
    cfg.workload.value_size = 64;
    cfg.workload.read_ratio = 0.5;
    const auto ops = harness::gen_workload(cfg.workload, cfg.seed);
    const auto shielded = committed_history(harness::simulate(cfg, ops).trace);
    cfg.shielded = false;
    const auto plain_run = harness::simulate(cfg, ops);
    const auto plain = committed_history(plain_run.trace);
    c.expect(!shielded.empty(), name(p) + ": nothing committed");
    c.expect(shielded == plain, name(p) + ": committed histories differ");
    compared += shielded.size();
  }
  c.note(std::to_string(compared) + " commits identical across 4 protocols");
  return c.result();
}

// 8. Round and hop accounting on benign runs.
Outcome round_counts() {
  Check c;
  auto ops_for = [](Cluster& cl, Protocol p, std::size_t n) {
    std::vector<std::pair<protocols::OpStats, OpType>> out;
    for (int i = 0; i < 20; ++i) {
      const std::string k = "k" + std::to_string(i % 5);
      for (auto op : {put(k, "v" + std::to_string(i)), get(k)}) {
        auto o = cl.run_op(0, op, 2000);
        if (!committed(o)) return out;
        out.emplace_back(cl.metrics()[protocols::OpKey{ClientId{1}, o->rid}], op.op);
        cl.run_until([] { return false; }, 60);  // quiesce between ops
      }
    }
    (void)p;
    (void)n;
    return out;
  };
  for (Protocol p : {Protocol::Abd, Protocol::Raft, Protocol::Chain}) {
    for (std::size_t n : {3u, 5u}) {
      auto cfg = testing::small_config(p, 8);
      cfg.n = n;
      cfg.f = max_faults(n);
      Cluster cl(cfg);
      auto stats = ops_for(cl, p, n);
      c.expect(stats.size() == 40, name(p) + " n=" + std::to_string(n) + ": ops did not complete");
      for (const auto& [s, op] : stats) {
        const std::string where = name(p) + " n=" + std::to_string(n);
        if (p == Protocol::Abd) {
          c.expect(s.broadcast_rounds == (op == OpType::Put ? 2u : 1u), where + ": abd rounds");
        } else if (p == Protocol::Raft && op == OpType::Put) {
          c.expect(s.broadcast_rounds == 2, where + ": raft write phases");
        } else if (p == Protocol::Chain && op == OpType::Put) {
          c.expect(s.forward_hops == n - 1 && s.ack_hops == n - 1, where + ": chain hops");
        }
      }
    }
  }
  c.note("abd write=2/read=1, raft write=2, cr write=(n-1)+(n-1) hops, n in {3,5}");
  return c.result();
}

std::string trace_digest(const ScenarioConfig& cfg) {
  const auto ops = harness::gen_workload(cfg.workload, cfg.seed);
  std::ostringstream os;
  write_trace(os, harness::simulate(cfg, ops).trace);
  return to_hex(crypto::sha256(to_bytes(os.str())));
}

// 9. Byte-identical traces across reruns.
Outcome determinism() {
  Check c;
  for (Protocol p : kAll) {
    for (const char* adv : {"drop", "reorder", "leader-partition"}) {
      ScenarioConfig cfg;
      cfg.protocol = p;
      cfg.seed = 9;
      cfg.gst = 300;
      cfg.adversary = harness::preset_adversary(adv);
      cfg.workload.op_count = 80;
      cfg.workload.value_size = 32;
      auto digests = parallel<std::string>(3, [&](std::size_t) { return trace_digest(cfg); });
      c.expect(digests[0] == digests[1] && digests[1] == digests[2],
               name(p) + "/" + adv + ": trace digests differ");
    }
  }
  c.note("12 scenarios x 3 runs, identical trace digests");
  return c.result();
}

// 10. Writes commit with n-f reachable replicas and stall with n-f-1.
Outcome quorum_arithmetic() {
  Check c;
  for (Protocol p : {Protocol::Abd, Protocol::Raft}) {
    for (std::size_t n : {3u, 5u}) {
      const std::size_t f = max_faults(n);
      const std::string where = name(p) + " n=" + std::to_string(n);
      for (bool one_more : {false, true}) {
        auto cfg = testing::small_config(p, 10 + n);
        cfg.n = n;
        cfg.f = f;
        Cluster cl(cfg);
        c.expect(cl.cas().quorum() == n - f && quorum_size(n, f) == n - f, where + ": quorum size");
        c.expect(committed(cl.run_op(0, put("warm", "up"), 2000)), where + ": warm-up write");
        // Crash from the highest id down; node 0 (the R-Raft leader) stays up.
        const std::size_t down = f + (one_more ? 1 : 0);
        for (std::size_t i = 0; i < down; ++i) cl.crash(NodeId{static_cast<std::uint32_t>(n - 1 - i)});
        c.expect(cl.live_members().size() == n - down, where + ": live count");
        auto o = cl.run_op(0, put("q", "v"), 3000);
        std::size_t commits = 0;
        for (const auto& e : cl.trace().events()) {
          commits += e.kind == EventKind::Commit && e.key == to_bytes("q");
        }
        if (!one_more) {
          c.expect(committed(o), where + ": write with n-f live did not commit");
        } else {
          c.expect(!committed(o) && commits == 0, where + ": write committed with n-f-1 live");
        }
      }
    }
  }
  c.note("abd and raft commit at n-f, stall at n-f-1, n in {3,5}");
  return c.result();
}

}  // namespace
}  // namespace shieldrep

int main() {
  using namespace shieldrep;
  using Clock = std::chrono::steady_clock;
  struct Criterion {
    int id;
    const char* title;
    Outcome (*fn)();
    double budget_s;
  };
  const Criterion criteria[] = {
      {1, "shield/verify conformance", shield_verify, 5},
      {2, "message-property regression", message_properties, 120},
      {3, "linearizability", consistency, 120},
      {4, "crash fault tolerance", crash_tolerance, 0},
      {5, "attestation gate", attestation_gate, 0},
      {6, "KV integrity and confidentiality", kv_integrity, 0},
      {7, "benign equivalence", benign_equivalence, 0},
      {8, "structural round counts", round_counts, 0},
      {9, "determinism", determinism, 0},
      {10, "quorum arithmetic", quorum_arithmetic, 0},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = cr.fn();
    } catch (const std::exception& e) {
      o = Outcome{false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (cr.budget_s > 0 && secs > cr.budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
    std::printf("[%s] criterion %d: %s - %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", cr.id, cr.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
