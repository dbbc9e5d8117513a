#pragma once

#include <memory>

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/crypto.hpp"
#include "shieldrep/core/trace.hpp"
#include "shieldrep/harness/scenario.hpp"
#include "shieldrep/tcb/trusted_core.hpp"

namespace shieldrep::testing {

inline Key key_from(std::string_view label, std::uint64_t n = 0) {
  ByteWriter w;
  w.u64(n);
  return crypto::derive_key(Key{}, label, w.data());
}

inline tcb::ChannelKeys channel_keys(std::string_view label) {
  return tcb::ChannelKeys{key_from(label, 1), key_from(label, 2)};
}

/// Two trusted cores sharing keys for both directions of lane 0.
struct CorePair {
  Trace trace;
  tcb::TrustedCore a;
  tcb::TrustedCore b;
  ChannelId ab{NodeId{0}, NodeId{1}, 0};
  ChannelId ba{NodeId{1}, NodeId{0}, 0};

  explicit CorePair(bool confidential = false)
      : a(NodeId{0}, tcb::CoreOptions{confidential, 1024, 4}, &trace),
        b(NodeId{1}, tcb::CoreOptions{confidential, 1024, 4}, &trace) {
    for (auto* c : {&a, &b}) {
      c->install_channel(ab, channel_keys("ab"));
      c->install_channel(ba, channel_keys("ba"));
      c->mark_trusted();
    }
  }
};

inline ScenarioConfig small_config(Protocol p, std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.protocol = p;
  c.n = 3;
  c.f = 1;
  c.gst = 0;
  c.delta = 4;
  c.seed = seed;
  c.workload.key_count = 64;
  c.workload.value_size = 32;
  c.workload.client_count = 2;
  c.tick_budget = 20'000;
  return c;
}

inline protocols::ClientOp put(std::string_view k, std::string_view v) {
  return protocols::ClientOp{OpType::Put, to_bytes(k), to_bytes(v)};
}

inline protocols::ClientOp get(std::string_view k) {
  return protocols::ClientOp{OpType::Get, to_bytes(k), {}};
}

inline Digest digest_of(std::string_view s) { return crypto::sha256(to_bytes(s)); }

// Hand-built traces; each violates exactly one property once.
namespace corpus {

inline TraceEvent ev(Tick at, std::uint64_t seq, EventKind k, std::uint32_t node) {
  TraceEvent e;
  e.at = at;
  e.seq = seq;
  e.kind = k;
  e.node = NodeId{node};
  return e;
}

inline TraceEvent msg(Tick at, std::uint64_t seq, EventKind k, std::uint32_t node, Counter cnt,
                      std::string_view body) {
  TraceEvent e = ev(at, seq, k, node);
  e.channel = ChannelId{NodeId{0}, NodeId{1}, 0};
  e.cnt = cnt;
  e.digest = digest_of(body);
  e.view = 1;
  return e;
}

inline TraceEvent commit(Tick at, std::uint64_t seq, std::uint32_t node, std::uint64_t index,
                         std::string_view key, std::string_view value) {
  TraceEvent e = ev(at, seq, EventKind::Commit, node);
  e.cnt = index;
  e.digest = digest_of(value);
  e.view = 1;
  e.client = ClientId{1};
  e.rid = index;
  e.key = to_bytes(key);
  return e;
}

inline std::vector<TraceEvent> accept_without_send() {
  return {ev(0, 0, EventKind::Trusted, 0), ev(0, 1, EventKind::Trusted, 1),
          msg(1, 2, EventKind::Accept, 1, 1, "forged")};
}

inline std::vector<TraceEvent> swapped_accepts() {
  return {ev(0, 0, EventKind::Trusted, 0),      ev(0, 1, EventKind::Trusted, 1),
          msg(1, 2, EventKind::Send, 0, 1, "m1"),  msg(1, 3, EventKind::Send, 0, 2, "m2"),
          msg(2, 4, EventKind::Accept, 1, 2, "m2"), msg(2, 5, EventKind::Accept, 1, 1, "m1")};
}

inline std::vector<TraceEvent> duplicate_accept() {
  return {ev(0, 0, EventKind::Trusted, 0), ev(0, 1, EventKind::Trusted, 1),
          msg(1, 2, EventKind::Send, 0, 1, "m1"), msg(2, 3, EventKind::Accept, 1, 1, "m1"),
          msg(3, 4, EventKind::Accept, 1, 1, "m1")};
}

inline std::vector<TraceEvent> divergent_commits() {
  return {commit(1, 0, 0, 1, "k", "a"), commit(1, 1, 1, 1, "k", "b")};
}

inline std::vector<TraceEvent> repeated_view() {
  auto a = ev(1, 0, EventKind::ViewChange, 0);
  a.view = 2;
  auto b = ev(2, 1, EventKind::ViewChange, 0);
  b.view = 2;
  return {a, b};
}

inline std::vector<tracecheck::LeaseSample> two_lease_holders() {
  return {{10, NodeId{0}, 1}, {10, NodeId{1}, 2}};
}

inline std::vector<tracecheck::HistoryOp> interleaved_reads() {
  auto op = [](std::uint32_t c, OpType t, std::string_view v, std::uint64_t inv,
               std::uint64_t resp) {
    tracecheck::HistoryOp h;
    h.client = ClientId{c};
    h.rid = inv + 1;
    h.op = t;
    h.key = to_bytes("x");
    h.value = to_bytes(v);
    h.found = t == OpType::Get;
    h.invoke = inv;
    h.response = resp;
    h.completed = true;
    return h;
  };
  return {op(1, OpType::Put, "1", 0, 3), op(2, OpType::Put, "2", 1, 2),
          op(3, OpType::Get, "1", 4, 5), op(3, OpType::Get, "2", 6, 7)};
}

}  // namespace corpus

}  // namespace shieldrep::testing
