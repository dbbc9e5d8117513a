#include "shieldrep/protocols/replica.hpp"

#include <algorithm>

#include "shieldrep/core/crypto.hpp"
#include "shieldrep/core/error.hpp"
#include "shieldrep/core/quorum.hpp"

namespace shieldrep::protocols {

SignedRequest sign_request(const ClientRequest& req, const Key& client_key) {
  return SignedRequest{req, crypto::hmac_sha256(client_key, encode(req))};
}

std::string_view to_string(ReplyStatus s) {
  switch (s) {
    case ReplyStatus::Ok: return "Ok";
    case ReplyStatus::NotLeader: return "NotLeader";
    case ReplyStatus::NotTail: return "NotTail";
    case ReplyStatus::Duplicate: return "Duplicate";
    case ReplyStatus::BadAuth: return "BadAuth";
    case ReplyStatus::Refused: return "Refused";
  }
  return "?";
}

namespace {

tcb::CoreOptions core_options(const ReplicaOptions& o) {
  tcb::CoreOptions c;
  c.confidential = o.confidential && o.shielded;
  c.lease_slack = o.timing.lease_slack;
  return c;
}

std::optional<Key> store_key(const attestation::ProvisionBundle& b, bool confidential) {
  if (!confidential) return std::nullopt;
  // Sealing key local to this node, derived from its own provisioned secrets.
  Key seed{};
  if (!b.channels.empty()) seed = b.channels.begin()->second.enc_key;
  ByteWriter ctx;
  ctx.node(b.id);
  return crypto::derive_key(seed, "store", ctx.data());
}

}  // namespace

Replica::Replica(const attestation::ProvisionBundle& bundle, ReplicaEnv env)
    : id_(bundle.id),
      members_(bundle.members),
      epoch_(bundle.epoch),
      env_(std::move(env)),
      core_(bundle.id, core_options(env_.options), env_.trace),
      store_(env_.options.store_capacity, store_key(bundle, env_.options.confidential)),
      rng_(env_.options.seed ^ (0x9e3779b97f4a7c15ull * (bundle.id.value + 1))) {
  for (const auto& [cq, keys] : bundle.channels) core_.install_channel(cq, keys);
  for (const auto& [c, k] : bundle.client_keys) core_.install_client_key(c, k);
  core_.mark_trusted();

  if (env_.options.shielded) {
    security_ = std::make_unique<transport::CoreSecurity>(core_);
  } else {
    security_ = std::make_unique<transport::PlainSecurity>(id_);
  }
  transport::EndpointConfig ec;
  ec.window = env_.options.window;
  ec.batch = env_.options.batch;
  ec.retransmit_timeout = env_.options.timing.retransmit_timeout;
  ep_ = transport::create_rpc(id_, *security_, *env_.nic, ec, env_.trace);

  handle(kSyncRequest, [this](const transport::Inbound& in) { on_sync_request(in); });
  handle(kSyncSnapshot, [this](const transport::Inbound& in) { on_sync_snapshot(in); });
  handle(kSyncDelta, [this](const transport::Inbound& in) {
    if (in.from != sync_source_) return;
    ByteReader r(in.payload);
    on_sync_delta(r);
  });
  handle(kHeartbeat, [this](const transport::Inbound& in) {
    core_.grant_lease(in.from, now_, timing().suspect_timeout, tcb::LeaseRole::Liveness);
    if (reported_.contains(in.from) && env_.cas &&
        env_.cas->retract_suspect(id_, in.from)) {
      reported_.erase(in.from);
    }
  });
}

Replica::~Replica() = default;

void Replica::handle(MessageKind kind, transport::Handler h) {
  ep_->reg_hdlr(kind, [this, h = std::move(h)](const transport::Inbound& in) {
    try {
      h(in);
    } catch (const Error& e) {
      // A verified peer sent an undecodable body; treat like any bad frame.
      if (env_.trace) env_.trace->reject(id_, "Malformed", in.tuple.cq, in.tuple.cnt, in.digest);
    }
  });
}

void Replica::submit(const SignedRequest& sr, ReplyFn reply) {
  if (crashed_) return;
  if (!core_.authenticate_client(sr.req.client, encode(sr.req), sr.mac)) {
    reply(Reply{ReplyStatus::BadAuth});
    return;
  }
  if (core_.status() != tcb::Status::Normal || joining_) {
    reply(Reply{ReplyStatus::Refused});
    return;
  }
  on_request(sr.req, std::move(reply));
}

void Replica::step(Tick now) {
  if (crashed_) return;
  now_ = now;
  ep_->receive(now);
  if (core_.status() == tcb::Status::Excised) return;
  liveness_tick();
  if (crashed_) return;
  on_tick();
  if (!crashed_) ep_->flush(now);
}

void Replica::crash() {
  if (crashed_) return;
  crashed_ = true;
  if (env_.trace) env_.trace->crash(id_);
  ep_.reset();
  if (env_.cas) env_.cas->node_crashed(id_);
}

bool Replica::on_membership(const attestation::MembershipUpdate& u) {
  if (crashed_) return false;
  for (const auto& [cq, keys] : u.channels) core_.install_channel(cq, keys);
  using attestation::UpdateKind;
  switch (u.kind) {
    case UpdateKind::ShadowAdded:
      expected_shadows_.insert(u.subject);
      return true;
    case UpdateKind::ShadowDropped:
      expected_shadows_.erase(u.subject);
      drop_subscriber(u.subject);
      ep_->close_session(u.subject);
      return true;
    case UpdateKind::Promoted:
      members_ = u.members;
      epoch_ = u.epoch;
      expected_shadows_.erase(u.subject);
      if (u.subject == id_) {
        joining_ = false;
        core_.set_status(tcb::Status::Normal);
      }
      on_members_changed(u);
      return true;
    case UpdateKind::Removed:
      members_ = u.members;
      epoch_ = u.epoch;
      reported_.erase(u.subject);
      if (u.subject == id_) {
        core_.set_status(tcb::Status::Excised);
        return true;
      }
      drop_subscriber(u.subject);
      ep_->close_session(u.subject);
      on_members_changed(u);
      return true;
  }
  return true;
}

void Replica::start_join(NodeId designated) {
  joining_ = true;
  sync_source_ = designated;
  core_.set_status(tcb::Status::Recovering);
  send(designated, kSyncRequest, {});
  next_heartbeat_ = now_ + timing().sync_timeout;  // reused as the sync retry timer
}

void Replica::on_sync_request(const transport::Inbound& in) {
  if (!expected_shadows_.contains(in.from) || core_.status() != tcb::Status::Normal) return;
  ByteWriter w;
  w.bytes(kvstore::encode_snapshot(store_.export_snapshot()));
  write_sync_state(w);
  send(in.from, kSyncSnapshot, std::move(w).take());
  subscribers_.insert(in.from);
  on_shadow_synced(in.from);
}

void Replica::on_sync_snapshot(const transport::Inbound& in) {
  if (!joining_ || in.from != sync_source_) return;
  ByteReader r(in.payload);
  store_.import_snapshot(kvstore::decode_snapshot(r.bytes()));
  read_sync_state(r);
  if (env_.cas) env_.cas->promote(id_);
}

void Replica::publish_delta(const Bytes& delta) {
  for (NodeId s : subscribers_) send(s, kSyncDelta, delta);
}

void Replica::drop_subscriber(NodeId shadow) { subscribers_.erase(shadow); }

void Replica::send(NodeId to, MessageKind kind, Bytes payload) {
  if (crashed_ || to == id_) return;
  try {
    ep_->send(to, kind, std::move(payload));
  } catch (const Error&) {
    // TX ring full: the message is shed; protocol timers retry.
  }
}

std::vector<NodeId> Replica::peers() const {
  std::vector<NodeId> out;
  for (NodeId m : members_) {
    if (m != id_) out.push_back(m);
  }
  return out;
}

void Replica::broadcast(MessageKind kind, const Bytes& payload, const OpKey* op) {
  for (NodeId p : peers()) send(p, kind, payload);
  if (op) count_round(*op);
}

void Replica::count_round(const OpKey& op) {
  if (env_.metrics) ++(*env_.metrics)[op].broadcast_rounds;
}

void Replica::count_hop(const OpKey& op, bool ack) {
  if (!env_.metrics) return;
  auto& s = (*env_.metrics)[op];
  ++(ack ? s.ack_hops : s.forward_hops);
}

std::size_t Replica::quorum() const {
  const std::size_t n = members_.size();
  return n - std::min(env_.options.f, max_faults(n));
}

void Replica::apply_write(const Bytes& key, const Bytes& value, kvstore::Version ts,
                          std::uint64_t order_index, ClientId client, RequestId rid,
                          ViewId view) {
  store_.write(key, value, ts);
  ++applied_count_;
  if (env_.trace) {
    env_.trace->commit(id_, client, rid, key, crypto::sha256(value), order_index, view);
  }
}

Reply Replica::read_local(const Bytes& key) {
  try {
    auto r = store_.get(key);
    return Reply{ReplyStatus::Ok, true, std::move(r.value)};
  } catch (const Error& e) {
    if (e.code() == Errc::NotFound) return Reply{ReplyStatus::Ok, false, {}};
    if (env_.trace) env_.trace->reject(id_, "IntegrityViolation");
    return Reply{ReplyStatus::Refused};
  }
}

std::uint64_t Replica::last_seen(NodeId peer) const {
  auto it = last_seen_.find(peer);
  return it == last_seen_.end() ? 0 : it->second;
}

void Replica::note_seen(NodeId peer, std::uint64_t marker) {
  auto& v = last_seen_[peer];
  v = std::max(v, marker);
}

void Replica::liveness_tick() {
  if (joining_) {
    // Sync source silent for too long: ask another member.
    if (now_ >= next_heartbeat_) {
      auto ps = peers();
      if (!ps.empty()) {
        auto it = std::upper_bound(ps.begin(), ps.end(), sync_source_);
        sync_source_ = it == ps.end() ? ps.front() : *it;
        send(sync_source_, kSyncRequest, {});
      }
      next_heartbeat_ = now_ + timing().sync_timeout;
    }
    return;
  }
  if (!liveness_ || core_.status() != tcb::Status::Normal) return;
  if (now_ >= next_heartbeat_) {
    ByteWriter w;
    w.u64(progress());
    broadcast(kHeartbeat, w.data());
    next_heartbeat_ = now_ + timing().heartbeat_interval;
  }
  for (NodeId p : peers()) {
    auto lease = core_.granted_lease(tcb::LeaseRole::Liveness, p);
    if (!lease) {
      core_.grant_lease(p, now_, timing().suspect_timeout, tcb::LeaseRole::Liveness);
      continue;
    }
    if (tcb::lease_valid(*lease, now_, /*as_granter=*/true) || reported_.contains(p)) continue;
    reported_.insert(p);
    on_suspect_expired(p);
    if (env_.cas) env_.cas->report_suspect(id_, p, last_seen(p));
    if (crashed_ || core_.status() != tcb::Status::Normal) return;
  }
}

}  // namespace shieldrep::protocols
