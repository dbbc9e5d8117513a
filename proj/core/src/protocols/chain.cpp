#include "shieldrep/protocols/chain.hpp"

#include <algorithm>

namespace shieldrep::protocols {

namespace {

void write_fwd(ByteWriter& w, std::uint64_t seq, ClientId client, RequestId rid,
               const Bytes& key, const Bytes& value) {
  w.u64(seq).u32(client.value).u64(rid).bytes(key).bytes(value);
}

}  // namespace

ChainReplica::ChainReplica(const attestation::ProvisionBundle& bundle, ReplicaEnv env)
    : Replica(bundle, std::move(env)) {
  enable_liveness(true);
  handle(kChainForward, [this](const transport::Inbound& in) { on_forward(in); });
  handle(kChainAck, [this](const transport::Inbound& in) { on_ack(in); });
  handle(kChainTailHandoff, [this](const transport::Inbound& in) { on_handoff(in); });
  if (trace()) trace()->view_change(id_, epoch_);
}

NodeId ChainReplica::successor() const {
  auto it = std::find(members_.begin(), members_.end(), id_);
  if (it == members_.end() || it + 1 == members_.end()) return kNoNode;
  return *(it + 1);
}

NodeId ChainReplica::predecessor() const {
  auto it = std::find(members_.begin(), members_.end(), id_);
  if (it == members_.end() || it == members_.begin()) return kNoNode;
  return *(it - 1);
}

void ChainReplica::on_request(const ClientRequest& req, ReplyFn reply) {
  if (req.op == OpType::Get) {
    if (!is_tail()) {
      Reply r{ReplyStatus::NotTail};
      r.leader_hint = members_.back();
      reply(r);
      return;
    }
    if (!reads_ready_) {
      reply(Reply{ReplyStatus::Refused});
      return;
    }
    if (core().dedupe_client(req.client, req.request_id) == tcb::DedupeResult::Duplicate) {
      reply(Reply{ReplyStatus::Duplicate});
      return;
    }
    reply(read_local(req.key));
    return;
  }
  if (!is_head()) {
    Reply r{ReplyStatus::NotLeader};
    r.leader_hint = members_.front();
    reply(r);
    return;
  }
  if (core().dedupe_client(req.client, req.request_id) == tcb::DedupeResult::Duplicate) {
    reply(Reply{ReplyStatus::Duplicate});
    return;
  }
  Write w{++last_seq_, req.client, req.request_id, req.key, req.value};
  const OpKey op{req.client, req.request_id};
  replies_[w.seq] = {std::move(reply), op};
  ops_[w.seq] = op;
  apply(w);
}

void ChainReplica::apply(const Write& w) {
  applied_seq_ = w.seq;
  core().dedupe_client(w.client, w.rid);
  apply_write(w.key, w.value, kvstore::Version{w.seq, NodeId{0}}, w.seq, w.client, w.rid,
              epoch_);
  ByteWriter d;
  write_fwd(d, w.seq, w.client, w.rid, w.key, w.value);
  publish_delta(d.data());
  if (is_tail()) {
    acked_upto(w.seq);
    return;
  }
  pending_[w.seq] = w;
  forward(w);
}

void ChainReplica::forward(const Write& w) {
  const NodeId next = successor();
  if (next == kNoNode) return;
  ByteWriter b;
  write_fwd(b, w.seq, w.client, w.rid, w.key, w.value);
  send(next, kChainForward, std::move(b).take());
  count_hop(OpKey{w.client, w.rid}, false);
}

void ChainReplica::acked_upto(std::uint64_t seq) {
  if (seq <= acked_seq_) return;
  const std::uint64_t from = acked_seq_;
  acked_seq_ = seq;
  pending_.erase(pending_.begin(), pending_.upper_bound(seq));
  if (is_head()) {
    while (!replies_.empty() && replies_.begin()->first <= seq) {
      auto fn = std::move(replies_.begin()->second.first);
      replies_.erase(replies_.begin());
      fn(Reply{ReplyStatus::Ok, true, {}});
    }
    ops_.erase(ops_.begin(), ops_.upper_bound(seq));
    return;
  }
  const NodeId prev = predecessor();
  if (prev == kNoNode) return;
  ByteWriter b;
  b.u64(seq);
  send(prev, kChainAck, std::move(b).take());
  for (auto it = ops_.upper_bound(from); it != ops_.end() && it->first <= seq; ++it) {
    count_hop(it->second, true);
  }
  ops_.erase(ops_.begin(), ops_.upper_bound(seq));
}

void ChainReplica::on_forward(const transport::Inbound& in) {
  ByteReader r(in.payload);
  Write w;
  w.seq = r.u64();
  w.client = ClientId{r.u32()};
  w.rid = r.u64();
  w.key = r.bytes();
  w.value = r.bytes();
  if (w.seq <= applied_seq_) {
    // Duplicate after a relink: re-acknowledge what is already stable here.
    const std::uint64_t stable = is_tail() ? applied_seq_ : acked_seq_;
    if (stable >= w.seq) {
      ByteWriter b;
      b.u64(stable);
      send(in.from, kChainAck, std::move(b).take());
    }
    return;
  }
  ops_[w.seq] = OpKey{w.client, w.rid};
  future_[w.seq] = std::move(w);
  drain_future();
}

void ChainReplica::drain_future() {
  while (!future_.empty() && future_.begin()->first == applied_seq_ + 1) {
    Write w = std::move(future_.begin()->second);
    future_.erase(future_.begin());
    apply(w);
  }
  while (!future_.empty() && future_.begin()->first <= applied_seq_) future_.erase(future_.begin());
  if (!reads_ready_ && applied_seq_ >= handoff_seq_ && handoff_seq_ > 0) reads_ready_ = true;
}

void ChainReplica::on_ack(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const std::uint64_t seq = r.u64();
  acked_upto(std::min(seq, applied_seq_));
}

void ChainReplica::on_handoff(const transport::Inbound& in) {
  ByteReader r(in.payload);
  handoff_seq_ = std::max<std::uint64_t>(r.u64(), 1);
  drain_future();
}

void ChainReplica::on_members_changed(const attestation::MembershipUpdate& u) {
  using attestation::UpdateKind;
  if (trace()) trace()->view_change(id_, epoch_);
  if (u.kind == UpdateKind::Promoted && u.subject == id_) {
    // Joined as the new tail; reads wait for the old tail's handoff.
    reads_ready_ = false;
    return;
  }
  if (u.kind == UpdateKind::Promoted) drop_subscriber(u.subject);
  if (is_head()) last_seq_ = std::max(last_seq_, applied_seq_);
  if (is_tail()) {
    reads_ready_ = reads_ready_ || handoff_seq_ == 0;
    // Everything applied at the tail is stable.
    if (applied_seq_ > acked_seq_) {
      acked_upto(applied_seq_);
    } else if (predecessor() != kNoNode && acked_seq_ > 0) {
      ByteWriter b;
      b.u64(acked_seq_);
      send(predecessor(), kChainAck, std::move(b).take());
    }
    return;
  }
  if (u.kind == UpdateKind::Promoted && successor() == u.subject) {
    // Old tail hands the tail role to the joiner.
    ByteWriter b;
    b.u64(applied_seq_);
    send(u.subject, kChainTailHandoff, std::move(b).take());
  }
  for (const auto& [seq, w] : pending_) forward(w);
  if (predecessor() != kNoNode && acked_seq_ > 0) {
    ByteWriter b;
    b.u64(acked_seq_);
    send(predecessor(), kChainAck, std::move(b).take());
  }
}

void ChainReplica::write_sync_state(ByteWriter& w) const { w.u64(applied_seq_); }

void ChainReplica::read_sync_state(ByteReader& r) {
  applied_seq_ = acked_seq_ = last_seq_ = r.u64();
}

void ChainReplica::on_sync_delta(ByteReader& r) {
  Write w;
  w.seq = r.u64();
  w.client = ClientId{r.u32()};
  w.rid = r.u64();
  w.key = r.bytes();
  w.value = r.bytes();
  if (w.seq != applied_seq_ + 1) return;
  applied_seq_ = acked_seq_ = w.seq;
  core().dedupe_client(w.client, w.rid);
  apply_write(w.key, w.value, kvstore::Version{w.seq, NodeId{0}}, w.seq, w.client, w.rid,
              epoch_);
}

}  // namespace shieldrep::protocols
