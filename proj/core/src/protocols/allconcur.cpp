#include "shieldrep/protocols/allconcur.hpp"

#include <algorithm>

#include "shieldrep/core/error.hpp"

namespace shieldrep::protocols {

namespace {

constexpr std::uint64_t kRetainRounds = 8;

}  // namespace

AllConcurReplica::AllConcurReplica(const attestation::ProvisionBundle& bundle, ReplicaEnv env)
    : Replica(bundle, std::move(env)), overlay_(Digraph::complete(bundle.members.size())) {
  if (bundle.members.size() > 1 && !overlay_.tolerates(std::min(options().f,
                                                                bundle.members.size() - 1))) {
    throw Error(Errc::InvalidConfig, "overlay connectivity below f+1");
  }
  enable_liveness(true);
  for (NodeId m : members_) active_from_[m] = 1;
  handle(kAcRound, [this](const transport::Inbound& in) { on_round(in); });
  handle(kAcForwarded, [this](const transport::Inbound& in) { on_forwarded(in); });
  if (trace()) trace()->view_change(id_, epoch_);
}

namespace {

Bytes encode_batch_msg(std::uint64_t r, std::optional<NodeId> origin,
                       const std::vector<std::tuple<ClientId, RequestId, Bytes, Bytes>>& ws) {
  ByteWriter w;
  if (origin) w.node(*origin);
  w.u64(r).u32(static_cast<std::uint32_t>(ws.size()));
  for (const auto& [c, rid, k, v] : ws) w.u32(c.value).u64(rid).bytes(k).bytes(v);
  return std::move(w).take();
}

}  // namespace

void AllConcurReplica::on_request(const ClientRequest& req, ReplyFn reply) {
  if (core().dedupe_client(req.client, req.request_id) == tcb::DedupeResult::Duplicate) {
    reply(Reply{ReplyStatus::Duplicate});
    return;
  }
  if (req.op == OpType::Get) {
    reply(read_local(req.key));
    return;
  }
  queued_.push_back(Write{req.client, req.request_id, req.key, req.value});
  replies_[OpKey{req.client, req.request_id}] = std::move(reply);
  progress_rounds();
}

void AllConcurReplica::on_tick() {
  if (status() == tcb::Status::Normal && !joining()) progress_rounds();
}

std::vector<NodeId> AllConcurReplica::contributors(std::uint64_t r) const {
  std::vector<NodeId> out;
  for (const auto& [n, from] : active_from_) {
    if (from > r) continue;
    const bool member = std::find(members_.begin(), members_.end(), n) != members_.end();
    auto c = cut_.find(n);
    if (member || (c != cut_.end() && c->second >= r)) out.push_back(n);
  }
  return out;  // map order: ascending node id
}

bool AllConcurReplica::blocked(std::uint64_t r) const {
  for (NodeId q : contributors(r)) {
    if (q == id_ || !suspected(q)) continue;
    auto it = reported_round_.find(q);
    if (it != reported_round_.end() && r > it->second) return true;
  }
  return false;
}

void AllConcurReplica::store_batch(std::uint64_t r, NodeId origin, Batch b) {
  if (r <= committed_) return;
  received_[r].try_emplace(origin, std::move(b));
}

void AllConcurReplica::progress_rounds() {
  if (status() != tcb::Status::Normal || joining()) return;
  auto mine = active_from_.find(id_);
  if (mine == active_from_.end() || round_ < mine->second) return;
  for (;;) {
    if (!started_) {
      auto rit = received_.find(round_);
      const bool demand = !queued_.empty() || (rit != received_.end() && !rit->second.empty());
      if (!demand) return;
      Batch batch = std::move(queued_);
      queued_.clear();
      std::vector<std::tuple<ClientId, RequestId, Bytes, Bytes>> ws;
      for (const auto& w : batch) ws.emplace_back(w.client, w.rid, w.key, w.value);
      broadcast(kAcRound, encode_batch_msg(round_, std::nullopt, ws));
      for (const auto& w : batch) count_round(OpKey{w.client, w.rid});
      received_[round_][id_] = std::move(batch);
      started_ = true;
    }
    if (committed_ + 1 != round_ || blocked(round_)) return;
    const auto& got = received_[round_];
    for (NodeId q : contributors(round_)) {
      if (!got.contains(q)) return;
    }
    commit(round_);
    ++round_;
    started_ = false;
  }
}

void AllConcurReplica::commit(std::uint64_t r) {
  ByteWriter delta;
  delta.u64(r).u64(order_index_);
  std::vector<std::tuple<ClientId, RequestId, Bytes, Bytes>> all;
  auto& got = received_[r];
  for (NodeId q : contributors(r)) {
    for (const auto& w : got[q]) {
      ++order_index_;
      core().dedupe_client(w.client, w.rid);
      apply_write(w.key, w.value, kvstore::Version{order_index_, NodeId{0}}, order_index_,
                  w.client, w.rid, r);
      all.emplace_back(w.client, w.rid, w.key, w.value);
      if (q == id_) {
        auto it = replies_.find(OpKey{w.client, w.rid});
        if (it != replies_.end()) {
          auto fn = std::move(it->second);
          replies_.erase(it);
          fn(Reply{ReplyStatus::Ok, true, {}});
        }
      }
    }
  }
  committed_ = r;
  delta.raw(encode_batch_msg(r, std::nullopt, all));
  publish_delta(delta.data());
  for (auto it = drop_after_.begin(); it != drop_after_.end();) {
    if (committed_ >= it->second) {
      drop_subscriber(it->first);
      it = drop_after_.erase(it);
    } else {
      ++it;
    }
  }
  if (r > kRetainRounds) received_.erase(received_.begin(), received_.lower_bound(r - kRetainRounds));
}

namespace {

std::vector<std::tuple<ClientId, RequestId, Bytes, Bytes>> read_writes(ByteReader& r) {
  const std::uint32_t n = r.u32();
  std::vector<std::tuple<ClientId, RequestId, Bytes, Bytes>> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    ClientId c{r.u32()};
    RequestId rid = r.u64();
    Bytes k = r.bytes();
    Bytes v = r.bytes();
    out.emplace_back(c, rid, std::move(k), std::move(v));
  }
  return out;
}

}  // namespace

void AllConcurReplica::on_round(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const std::uint64_t round = r.u64();
  auto ws = read_writes(r);
  auto c = cut_.find(in.from);
  if (c != cut_.end() && round > c->second) return;
  note_seen(in.from, round);
  Batch b;
  for (auto& [cl, rid, k, v] : ws) b.push_back(Write{cl, rid, std::move(k), std::move(v)});
  store_batch(round, in.from, std::move(b));
  progress_rounds();
}

void AllConcurReplica::on_forwarded(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const NodeId origin = r.node();
  const std::uint64_t round = r.u64();
  auto ws = read_writes(r);
  auto c = cut_.find(origin);
  if (c == cut_.end() || round > c->second) return;
  Batch b;
  for (auto& [cl, rid, k, v] : ws) b.push_back(Write{cl, rid, std::move(k), std::move(v)});
  store_batch(round, origin, std::move(b));
  progress_rounds();
}

void AllConcurReplica::on_suspect_expired(NodeId peer) {
  // Hold the peer's later rounds until it is excised or the report is retracted.
  reported_round_[peer] = last_seen(peer);
}

void AllConcurReplica::on_members_changed(const attestation::MembershipUpdate& u) {
  using attestation::UpdateKind;
  if (trace()) trace()->view_change(id_, epoch_);
  if (u.kind == UpdateKind::Promoted) {
    if (u.subject == id_) {
      round_ = std::max(u.activation, committed_ + 1);
      started_ = false;
    } else if (subscribers().contains(u.subject) && u.activation > committed_ + 1) {
      drop_after_[u.subject] = u.activation - 1;
    } else {
      drop_subscriber(u.subject);
    }
    active_from_[u.subject] = u.activation;
    progress_rounds();
    return;
  }
  if (u.kind != UpdateKind::Removed) return;
  const NodeId q = u.subject;
  cut_[q] = u.cut;
  reported_round_.erase(q);
  drop_after_.erase(q);
  for (auto it = received_.begin(); it != received_.end(); ++it) {
    const std::uint64_t r = it->first;
    auto b = it->second.find(q);
    if (b == it->second.end()) continue;
    if (r > u.cut) {
      it->second.erase(b);
      continue;
    }
    std::vector<std::tuple<ClientId, RequestId, Bytes, Bytes>> ws;
    for (const auto& w : b->second) ws.emplace_back(w.client, w.rid, w.key, w.value);
    broadcast(kAcForwarded, encode_batch_msg(r, q, ws));
  }
  progress_rounds();
}

void AllConcurReplica::write_sync_state(ByteWriter& w) const {
  w.u64(committed_).u64(order_index_);
  w.u32(static_cast<std::uint32_t>(active_from_.size()));
  for (const auto& [n, a] : active_from_) w.node(n).u64(a);
  w.u32(static_cast<std::uint32_t>(cut_.size()));
  for (const auto& [n, c] : cut_) w.node(n).u64(c);
}

void AllConcurReplica::read_sync_state(ByteReader& r) {
  committed_ = r.u64();
  order_index_ = r.u64();
  round_ = committed_ + 1;
  const std::uint32_t na = r.u32();
  for (std::uint32_t i = 0; i < na; ++i) {
    NodeId n = r.node();
    active_from_[n] = r.u64();
  }
  const std::uint32_t nc = r.u32();
  for (std::uint32_t i = 0; i < nc; ++i) {
    NodeId n = r.node();
    cut_[n] = r.u64();
  }
}

void AllConcurReplica::on_sync_delta(ByteReader& r) {
  const std::uint64_t round = r.u64();
  const std::uint64_t base = r.u64();
  if (round != committed_ + 1) return;
  r.u64();  // batch round, same as `round`
  auto ws = read_writes(r);
  order_index_ = base;
  for (const auto& [c, rid, k, v] : ws) {
    ++order_index_;
    core().dedupe_client(c, rid);
    apply_write(k, v, kvstore::Version{order_index_, NodeId{0}}, order_index_, c, rid, round);
  }
  committed_ = round;
  if (round_ <= committed_) round_ = committed_ + 1;
  progress_rounds();
}

}  // namespace shieldrep::protocols
