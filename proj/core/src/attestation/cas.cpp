#include "shieldrep/attestation/cas.hpp"

#include <algorithm>

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/crypto.hpp"
#include "shieldrep/core/error.hpp"
#include "shieldrep/core/quorum.hpp"

namespace shieldrep::attestation {

std::string_view to_string(DenyReason r) {
  switch (r) {
    case DenyReason::BadQuote: return "BadQuote";
    case DenyReason::BadNonce: return "BadNonce";
    case DenyReason::UnknownMeasurement: return "UnknownMeasurement";
    case DenyReason::NoQuorum: return "NoQuorum";
    case DenyReason::NotAttested: return "NotAttested";
  }
  return "?";
}

Cas::Cas(Key master, std::uint64_t seed, CasOptions options, Trace* trace)
    : master_(master), rng_(seed), options_(std::move(options)), trace_(trace) {}

void Cas::register_machine(const std::string& machine, const Key& hw_key) {
  hw_keys_[machine] = hw_key;
}

void Cas::expect(const Measurement& m) { expected_.insert(m); }

AttestationSession Cas::begin(const std::string& machine) {
  AttestationSession s;
  s.id = next_session_++;
  s.machine = machine;
  for (auto& b : s.nonce) b = static_cast<std::uint8_t>(rng_());
  for (auto& b : s.ephemeral_key) b = static_cast<std::uint8_t>(rng_());
  return s;
}

AttestationResult Cas::complete(AttestationSession& session, const SignedQuote& quote) {
  auto deny = [&](DenyReason r) -> AttestationResult {
    if (session.state == AttestationSession::State::Challenged) {
      session.state = AttestationSession::State::Failed;
    }
    if (trace_) trace_->reject(kNoNode, std::string(to_string(r)));
    return Denied{r};
  };
  if (session.state != AttestationSession::State::Challenged) return deny(DenyReason::BadNonce);
  session.state = AttestationSession::State::Quoted;
  if (!crypto::tag_equal(quote.nonce, session.nonce)) return deny(DenyReason::BadNonce);
  auto hw = hw_keys_.find(session.machine);
  if (hw == hw_keys_.end() || !verify_hw_tag(quote, hw->second)) {
    session.state = AttestationSession::State::Failed;
    return deny(DenyReason::BadQuote);
  }
  if (!verify_binding(quote, session.ephemeral_key)) {
    session.state = AttestationSession::State::Failed;
    return deny(DenyReason::BadQuote);
  }
  if (!expected_.contains(quote.measurement)) {
    session.state = AttestationSession::State::Failed;
    return deny(DenyReason::UnknownMeasurement);
  }
  session.state = AttestationSession::State::Provisioned;
  const NodeId id{next_fresh_id_++};
  attested_.insert(id);
  machine_of_[id] = session.machine;
  return Provisioned{id};
}

tcb::ChannelKeys Cas::channel_keys(const ChannelId& cq) const {
  auto epoch_of = [&](NodeId n) {
    auto it = enrolled_epoch_.find(n);
    return it == enrolled_epoch_.end() ? ViewId{0} : it->second;
  };
  ByteWriter ctx;
  ctx.channel(cq).u64(std::max(epoch_of(cq.sender), epoch_of(cq.receiver)));
  return tcb::ChannelKeys{crypto::derive_key(master_, "chan-mac", ctx.data()),
                          crypto::derive_key(master_, "chan-enc", ctx.data())};
}

std::map<ChannelId, tcb::ChannelKeys> Cas::channels_between(NodeId a, NodeId b) const {
  std::map<ChannelId, tcb::ChannelKeys> out;
  for (auto lane : options_.lanes) {
    const ChannelId ab{a, b, lane};
    out.emplace(ab, channel_keys(ab));
    out.emplace(ab.reversed(), channel_keys(ab.reversed()));
  }
  return out;
}

Key Cas::client_key(ClientId c) const {
  ByteWriter ctx;
  ctx.u32(c.value);
  return crypto::derive_key(master_, "client", ctx.data());
}

std::map<NodeId, ProvisionBundle> Cas::form_cluster(const std::vector<NodeId>& ids) {
  for (NodeId id : ids) {
    if (!attested_.contains(id)) {
      throw Error(Errc::JoinDenied, to_string(id) + " is not attested");
    }
  }
  members_ = ids;
  std::sort(members_.begin(), members_.end());
  for (NodeId id : members_) enrolled_epoch_[id] = epoch_;
  std::map<NodeId, ProvisionBundle> out;
  for (NodeId id : members_) {
    ProvisionBundle b;
    b.id = id;
    b.epoch = epoch_;
    b.members = members_;
    for (NodeId peer : members_) {
      if (peer == id) continue;
      for (auto& [cq, k] : channels_between(id, peer)) {
        b.channels.emplace(cq, k);
        released_.insert(cq);
      }
    }
    for (std::uint32_t c = 1; c <= options_.client_count; ++c) {
      b.client_keys.emplace(ClientId{c}, client_key(ClientId{c}));
    }
    out.emplace(id, std::move(b));
  }
  return out;
}

std::vector<NodeId> Cas::live_members() const {
  std::vector<NodeId> out;
  for (NodeId m : members_) {
    if (hooks_.contains(m)) out.push_back(m);
  }
  return out;
}

bool Cas::is_member(NodeId n) const {
  return std::find(members_.begin(), members_.end(), n) != members_.end();
}

std::size_t Cas::quorum() const {
  const std::size_t n = members_.size();
  return n - std::min(options_.f, max_faults(n));
}

void Cas::register_hooks(NodeId node, MemberHooks hooks) { hooks_[node] = std::move(hooks); }

void Cas::broadcast(MembershipUpdate base, NodeId extra) {
  std::vector<NodeId> targets = live_members();
  if (extra != kNoNode && hooks_.contains(extra) &&
      std::find(targets.begin(), targets.end(), extra) == targets.end()) {
    targets.push_back(extra);
  }
  for (NodeId t : targets) {
    MembershipUpdate u = base;
    u.channels.clear();
    for (const auto& [cq, k] : base.channels) {
      if (cq.sender == t || cq.receiver == t) u.channels.emplace(cq, k);
    }
    auto it = hooks_.find(t);
    if (it != hooks_.end() && it->second.on_update) it->second.on_update(u);
  }
}

ProvisionBundle Cas::join_cluster(NodeId node, NodeId designated) {
  if (!attested_.contains(node) || is_member(node)) {
    if (trace_) trace_->reject(node, std::string(to_string(DenyReason::NotAttested)));
    throw Error(Errc::JoinDenied, to_string(node) + " is not an attested newcomer");
  }
  enrolled_epoch_[node] = epoch_;
  MembershipUpdate u;
  u.kind = UpdateKind::ShadowAdded;
  u.subject = node;
  u.epoch = epoch_;
  u.members = members_;
  u.designated = designated;
  for (NodeId m : members_) {
    for (auto& [cq, k] : channels_between(node, m)) u.channels.emplace(cq, k);
  }

  std::size_t acks = 0;
  std::vector<NodeId> acked;
  for (NodeId m : live_members()) {
    MembershipUpdate mine = u;
    std::erase_if(mine.channels, [m](const auto& kv) {
      return kv.first.sender != m && kv.first.receiver != m;
    });
    if (hooks_[m].on_update && hooks_[m].on_update(mine)) {
      ++acks;
      acked.push_back(m);
    }
  }
  if (acks < quorum() || std::find(acked.begin(), acked.end(), designated) == acked.end()) {
    MembershipUpdate abort;
    abort.kind = UpdateKind::ShadowDropped;
    abort.subject = node;
    abort.epoch = epoch_;
    abort.members = members_;
    for (NodeId m : acked) hooks_[m].on_update(abort);
    if (trace_) trace_->reject(node, std::string(to_string(DenyReason::NoQuorum)));
    throw Error(Errc::JoinDenied, "only " + std::to_string(acks) + " members acknowledged");
  }
  shadows_[node] = designated;
  for (const auto& [cq, k] : u.channels) released_.insert(cq);

  ProvisionBundle b;
  b.id = node;
  b.epoch = epoch_;
  b.members = members_;
  b.channels = std::move(u.channels);
  for (std::uint32_t c = 1; c <= options_.client_count; ++c) {
    b.client_keys.emplace(ClientId{c}, client_key(ClientId{c}));
  }
  return b;
}

void Cas::promote(NodeId node) {
  if (!shadows_.contains(node)) return;
  shadows_.erase(node);
  std::uint64_t activation = 0;
  for (NodeId m : live_members()) {
    auto& h = hooks_[m];
    if (h.progress) activation = std::max(activation, h.progress());
  }
  members_.push_back(node);
  ++epoch_;
  MembershipUpdate u;
  u.kind = UpdateKind::Promoted;
  u.subject = node;
  u.epoch = epoch_;
  u.members = members_;
  u.activation = activation + 1;
  broadcast(u, node);
}

void Cas::remove(NodeId node, std::uint64_t cut) {
  std::erase(members_, node);
  suspicions_.erase(node);
  for (auto& [suspect, reporters] : suspicions_) reporters.erase(node);
  ++epoch_;
  MembershipUpdate u;
  u.kind = UpdateKind::Removed;
  u.subject = node;
  u.epoch = epoch_;
  u.members = members_;
  u.cut = cut;
  broadcast(u, node);
}

bool Cas::report_suspect(NodeId reporter, NodeId suspect, std::uint64_t last_seen) {
  if (!is_member(suspect) || !is_member(reporter)) return false;
  auto& reports = suspicions_[suspect];
  reports[reporter] = last_seen;
  for (NodeId m : live_members()) {
    if (m != suspect && !reports.contains(m)) return false;
  }
  std::uint64_t cut = 0;
  for (const auto& [r, seen] : reports) cut = std::max(cut, seen);
  remove(suspect, cut);
  return true;
}

bool Cas::retract_suspect(NodeId reporter, NodeId suspect) {
  if (!is_member(suspect)) return false;
  auto it = suspicions_.find(suspect);
  if (it != suspicions_.end()) it->second.erase(reporter);
  return true;
}

void Cas::excise(NodeId node) {
  if (is_member(node)) remove(node, 0);
}

void Cas::node_crashed(NodeId node) {
  hooks_.erase(node);
  auto sh = shadows_.find(node);
  if (sh != shadows_.end()) {
    shadows_.erase(sh);
    MembershipUpdate u;
    u.kind = UpdateKind::ShadowDropped;
    u.subject = node;
    u.epoch = epoch_;
    u.members = members_;
    broadcast(u);
  }
}

std::vector<Key> Cas::released_keys() const {
  std::vector<Key> out;
  for (const auto& cq : released_) {
    auto k = channel_keys(cq);
    out.push_back(k.mac_key);
    out.push_back(k.enc_key);
  }
  return out;
}

}  // namespace shieldrep::attestation
