#include "shieldrep/protocols/abd.hpp"

#include <algorithm>

#include "shieldrep/core/error.hpp"

namespace shieldrep::protocols {

namespace {

void write_ts(ByteWriter& w, const kvstore::Version& ts) { w.u64(ts.counter).node(ts.node); }

kvstore::Version read_ts(ByteReader& r) {
  kvstore::Version ts;
  ts.counter = r.u64();
  ts.node = r.node();
  return ts;
}

// Commit order index for a write timestamp: counter in the high bits, the
// writer id as tie-breaker.
std::uint64_t order_of(const kvstore::Version& ts) {
  return (ts.counter << 24) | (ts.node.value & 0xffffffu);
}

}  // namespace

kvstore::Version next_timestamp(const std::vector<kvstore::Version>& seen,
                                std::uint64_t last_issued, NodeId coordinator) {
  std::uint64_t max = last_issued;
  for (const auto& ts : seen) max = std::max(max, ts.counter);
  return kvstore::Version{max + 1, coordinator};
}

AbdReplica::AbdReplica(const attestation::ProvisionBundle& bundle, ReplicaEnv env)
    : Replica(bundle, std::move(env)) {
  handle(kAbdReadTs, [this](const transport::Inbound& in) { on_read_ts(in); });
  handle(kAbdTsReply, [this](const transport::Inbound& in) { on_ts_reply(in); });
  handle(kAbdWrite, [this](const transport::Inbound& in) { on_write(in); });
  handle(kAbdWriteAck, [this](const transport::Inbound& in) { on_write_ack(in); });
  handle(kAbdRead, [this](const transport::Inbound& in) { on_read(in); });
  handle(kAbdReadReply, [this](const transport::Inbound& in) { on_read_reply(in); });
}

AbdReplica::Reading AbdReplica::local(const Bytes& key) {
  Reading out;
  auto v = store().version(key);
  if (!v) return out;
  Reply r = read_local(key);
  if (r.status != ReplyStatus::Ok || !r.found) return out;
  out.ts = *v;
  out.found = true;
  out.value = std::move(r.value);
  return out;
}

void AbdReplica::on_request(const ClientRequest& req, ReplyFn reply) {
  if (core().dedupe_client(req.client, req.request_id) == tcb::DedupeResult::Duplicate) {
    reply(Reply{ReplyStatus::Duplicate});
    return;
  }
  const std::uint64_t op_id = next_op_++;
  Op& op = ops_[op_id];
  op.req = req;
  op.reply = std::move(reply);
  op.phase = req.op == OpType::Put ? Phase::QueryTs : Phase::QueryValue;
  op.replies[id_] = local(req.key);

  ByteWriter w;
  w.u64(op_id).bytes(req.key);
  const OpKey key{req.client, req.request_id};
  broadcast(op.phase == Phase::QueryTs ? kAbdReadTs : kAbdRead, w.data(), &key);
  // A single-member quorum completes immediately.
  if (op.replies.size() >= quorum()) {
    transport::Inbound self;
    self.from = id_;
    ByteWriter p;
    if (op.phase == Phase::QueryTs) {
      p.u64(op_id);
      write_ts(p, op.replies[id_].ts);
      self.payload = std::move(p).take();
      on_ts_reply(self);
    } else {
      const auto& mine = op.replies[id_];
      p.u64(op_id).u8(mine.found ? 1 : 0);
      write_ts(p, mine.ts);
      p.bytes(mine.value);
      self.payload = std::move(p).take();
      on_read_reply(self);
    }
  }
}

void AbdReplica::on_read_ts(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const std::uint64_t op_id = r.u64();
  const Bytes key = r.bytes();
  ByteWriter w;
  w.u64(op_id);
  write_ts(w, store().version(key).value_or(kvstore::Version{}));
  send(in.from, kAbdTsReply, std::move(w).take());
}

void AbdReplica::on_ts_reply(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const std::uint64_t op_id = r.u64();
  const kvstore::Version ts = read_ts(r);
  auto it = ops_.find(op_id);
  if (it == ops_.end() || it->second.phase != Phase::QueryTs) return;
  Op& op = it->second;
  op.replies[in.from].ts = ts;
  if (op.replies.size() < quorum()) return;
  std::vector<kvstore::Version> seen;
  for (const auto& [n, rd] : op.replies) seen.push_back(rd.ts);
  // Two concurrent writes from this coordinator must not share a timestamp.
  auto& issued = issued_[op.req.key];
  op.ts = next_timestamp(seen, issued, id_);
  issued = op.ts.counter;
  op.value = op.req.value;
  op.found = true;
  store_phase(op_id, op);
}

void AbdReplica::on_read(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const std::uint64_t op_id = r.u64();
  const Bytes key = r.bytes();
  const Reading rd = local(key);
  ByteWriter w;
  w.u64(op_id).u8(rd.found ? 1 : 0);
  write_ts(w, rd.ts);
  w.bytes(rd.value);
  send(in.from, kAbdReadReply, std::move(w).take());
}

void AbdReplica::on_read_reply(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const std::uint64_t op_id = r.u64();
  Reading rd;
  rd.found = r.u8() != 0;
  rd.ts = read_ts(r);
  rd.value = r.bytes();
  auto it = ops_.find(op_id);
  if (it == ops_.end() || it->second.phase != Phase::QueryValue) return;
  Op& op = it->second;
  op.replies[in.from] = std::move(rd);
  if (op.replies.size() < quorum()) return;
  const Reading* best = nullptr;
  for (const auto& [n, x] : op.replies) {
    if (!best || x.ts > best->ts) best = &x;
  }
  std::size_t agree = 0;
  for (const auto& [n, x] : op.replies) {
    if (x.ts == best->ts) ++agree;
  }
  op.ts = best->ts;
  op.found = best->found;
  op.value = best->value;
  if (agree >= quorum() || !op.found) {
    finish(op_id, Reply{ReplyStatus::Ok, op.found, op.value});
    return;
  }
  store_phase(op_id, op);
}

void AbdReplica::store_phase(std::uint64_t op_id, Op& op) {
  op.phase = Phase::Store;
  op.acks = {id_};
  store_if_newer(op.req.key, op.value, op.ts, op.req.client, op.req.request_id);
  ByteWriter w;
  w.u64(op_id).bytes(op.req.key).bytes(op.value);
  write_ts(w, op.ts);
  w.u32(op.req.client.value).u64(op.req.request_id);
  const OpKey key{op.req.client, op.req.request_id};
  broadcast(kAbdWrite, w.data(), &key);
  if (op.acks.size() >= quorum()) {
    Reply reply{ReplyStatus::Ok, true, {}};
    if (op.req.op == OpType::Get) reply.value = op.value;
    finish(op_id, std::move(reply));
  }
}

void AbdReplica::store_if_newer(const Bytes& key, const Bytes& value, kvstore::Version ts,
                                ClientId client, RequestId rid) {
  auto cur = store().version(key);
  if (cur && !(ts > *cur)) return;
  apply_write(key, value, ts, order_of(ts), client, rid, epoch_);
  ByteWriter d;
  d.bytes(key).bytes(value);
  write_ts(d, ts);
  d.u32(client.value).u64(rid);
  publish_delta(d.data());
}

void AbdReplica::on_write(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const std::uint64_t op_id = r.u64();
  const Bytes key = r.bytes();
  const Bytes value = r.bytes();
  const kvstore::Version ts = read_ts(r);
  const ClientId client{r.u32()};
  const RequestId rid = r.u64();
  store_if_newer(key, value, ts, client, rid);
  ByteWriter w;
  w.u64(op_id);
  send(in.from, kAbdWriteAck, std::move(w).take());
}

void AbdReplica::on_write_ack(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const std::uint64_t op_id = r.u64();
  auto it = ops_.find(op_id);
  if (it == ops_.end() || it->second.phase != Phase::Store) return;
  Op& op = it->second;
  op.acks.insert(in.from);
  if (op.acks.size() < quorum()) return;
  Reply reply{ReplyStatus::Ok, true, {}};
  if (op.req.op == OpType::Get) {
    reply.found = op.found;
    reply.value = op.value;
  }
  finish(op_id, std::move(reply));
}

void AbdReplica::finish(std::uint64_t op_id, Reply reply) {
  auto it = ops_.find(op_id);
  if (it == ops_.end()) return;
  auto fn = std::move(it->second.reply);
  ops_.erase(it);
  fn(reply);
}

void AbdReplica::on_members_changed(const attestation::MembershipUpdate& u) {
  if (u.kind == attestation::UpdateKind::Promoted && u.subject != id_) drop_subscriber(u.subject);
}

void AbdReplica::on_sync_delta(ByteReader& r) {
  const Bytes key = r.bytes();
  const Bytes value = r.bytes();
  const kvstore::Version ts = read_ts(r);
  const ClientId client{r.u32()};
  const RequestId rid = r.u64();
  store_if_newer(key, value, ts, client, rid);
}

}  // namespace shieldrep::protocols
