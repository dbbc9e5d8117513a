#include "shieldrep/tcb/trusted_core.hpp"

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/crypto.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep::tcb {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Normal: return "Normal";
    case Status::ViewChange: return "ViewChange";
    case Status::Recovering: return "Recovering";
    case Status::Excised: return "Excised";
  }
  return "?";
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::BadMac: return "BadMac";
    case RejectReason::StaleCounter: return "StaleCounter";
    case RejectReason::WrongView: return "WrongView";
    case RejectReason::Malformed: return "Malformed";
  }
  return "?";
}

TrustedCore::TrustedCore(NodeId id, CoreOptions options, Trace* trace)
    : id_(id), options_(options), trace_(trace) {}

void TrustedCore::install_channel(const ChannelId& cq, const ChannelKeys& keys) {
  keys_[cq] = keys;
}

void TrustedCore::install_client_key(ClientId client, const Key& key) {
  client_keys_[client] = key;
}

void TrustedCore::mark_trusted() {
  if (trusted_) return;
  trusted_ = true;
  if (trace_) trace_->trusted(id_);
}

ShieldedMessage TrustedCore::shield_request(std::span<const std::uint8_t> req,
                                            const ChannelId& cq, MessageKind kind) {
  if (status_ == Status::Excised || (status_ == Status::Recovering && !is_control_kind(kind))) {
    throw Error(Errc::NotOperational,
                "status " + std::string(to_string(status_)) + " forbids sending kind " +
                    std::to_string(kind.value));
  }
  auto key_it = keys_.find(cq);
  if (key_it == keys_.end() || cq.sender != id_) {
    throw Error(Errc::NoKey, "channel " + to_string(cq) + " not provisioned");
  }
  Counter& cnt = send_counters_[cq];
  ++cnt;

  ShieldedMessage msg;
  msg.meta.kind = kind;
  msg.meta.tuple = SequenceTuple{view_, cq, cnt};
  if (options_.confidential) {
    auto nonce = crypto::nonce_from_counter(static_cast<std::uint32_t>(view_), cnt);
    auto aad = encode_header(msg.meta, req.size() + crypto::kGcmTagSize);
    msg.payload = crypto::aead_seal(key_it->second.enc_key, nonce, req, aad);
  } else {
    msg.payload.assign(req.begin(), req.end());
  }
  msg.mac = crypto::hmac_sha256(key_it->second.mac_key, mac_input(msg.meta, msg.payload));
  if (trace_) {
    trace_->send(id_, message_digest(canonical_encode(msg)), cq, cnt, view_);
  }
  return msg;
}

Reject TrustedCore::reject(RejectReason reason, const ShieldedMessage* msg,
                           const Digest* digest) {
  if (trace_) {
    std::optional<ChannelId> cq;
    Counter cnt = 0;
    if (msg) {
      cq = msg->meta.tuple.cq;
      cnt = msg->meta.tuple.cnt;
    }
    trace_->reject(id_, std::string(to_string(reason)), cq, cnt,
                   digest ? std::optional<Digest>(*digest) : std::nullopt);
  }
  return Reject{reason};
}

std::optional<Bytes> TrustedCore::open_payload(const ShieldedMessage& msg,
                                               const ChannelKeys& keys) const {
  if (!options_.confidential) return msg.payload;
  auto nonce = crypto::nonce_from_counter(static_cast<std::uint32_t>(msg.meta.tuple.view),
                                          msg.meta.tuple.cnt);
  auto aad = encode_header(msg.meta, msg.payload.size());
  return crypto::aead_open(keys.enc_key, nonce, msg.payload, aad);
}

Verdict TrustedCore::verify_frame(std::span<const std::uint8_t> wire) {
  auto msg = canonical_decode(wire);
  if (!msg) {
    auto d = message_digest(wire);
    return reject(RejectReason::Malformed, nullptr, &d);
  }
  return verify_request(*msg);
}

Verdict TrustedCore::verify_request(const ShieldedMessage& msg) {
  const auto encoded = canonical_encode(msg);
  const Digest digest = message_digest(encoded);
  const ChannelId& cq = msg.meta.tuple.cq;

  if (cq.receiver != id_) return reject(RejectReason::Malformed, &msg, &digest);
  auto key_it = keys_.find(cq);
  if (key_it == keys_.end()) return reject(RejectReason::BadMac, &msg, &digest);
  const Mac expected = crypto::hmac_sha256(key_it->second.mac_key, mac_input(msg.meta, msg.payload));
  if (!crypto::tag_equal(expected, msg.mac)) return reject(RejectReason::BadMac, &msg, &digest);

  if (msg.meta.tuple.view != view_) return reject(RejectReason::WrongView, &msg, &digest);

  Counter& rcnt = recv_counters_[cq];
  const Counter cnt = msg.meta.tuple.cnt;
  if (cnt <= rcnt) return reject(RejectReason::StaleCounter, &msg, &digest);

  auto plain = open_payload(msg, key_it->second);
  if (!plain) return reject(RejectReason::BadMac, &msg, &digest);

  Delivered d{std::move(*plain), msg.meta.tuple, msg.meta.kind, digest};
  if (cnt == rcnt + 1) {
    rcnt = cnt;
    if (trace_) trace_->accept(id_, digest, cq, cnt, msg.meta.tuple.view);
    return AcceptNow{std::move(d)};
  }

  auto& buf = future_[cq];
  if (buf.contains(cnt)) return BufferFuture{msg.meta.tuple};
  if (buf.size() >= options_.future_capacity) {
    return reject(RejectReason::StaleCounter, &msg, &digest);
  }
  buf.emplace(cnt, std::move(d));
  return BufferFuture{msg.meta.tuple};
}

std::vector<Delivered> TrustedCore::drain_ready(const ChannelId& cq) {
  std::vector<Delivered> out;
  auto buf_it = future_.find(cq);
  if (buf_it == future_.end()) return out;
  auto& buf = buf_it->second;
  Counter& rcnt = recv_counters_[cq];
  while (!buf.empty()) {
    auto it = buf.begin();
    if (it->first <= rcnt) {
      buf.erase(it);
      continue;
    }
    if (it->first != rcnt + 1) break;
    rcnt = it->first;
    if (trace_) trace_->accept(id_, it->second.digest, cq, rcnt, it->second.tuple.view);
    out.push_back(std::move(it->second));
    buf.erase(it);
  }
  return out;
}

DedupeResult TrustedCore::dedupe_client(ClientId client, RequestId rid) {
  auto& last = client_table_[client];
  if (rid <= last) return DedupeResult::Duplicate;
  last = rid;
  return DedupeResult::Fresh;
}

bool TrustedCore::authenticate_client(ClientId client, std::span<const std::uint8_t> body,
                                      const Mac& tag) const {
  auto it = client_keys_.find(client);
  if (it == client_keys_.end()) return false;
  return crypto::tag_equal(crypto::hmac_sha256(it->second, body), tag);
}

bool TrustedCore::lease_conflicts(NodeId holder, Tick now) const {
  auto it = leases_.find({LeaseRole::Leadership, kNoNode});
  if (it == leases_.end()) return false;
  return it->second.holder != holder && lease_valid(it->second, now, /*as_granter=*/true);
}

Lease TrustedCore::grant_lease(NodeId holder, Tick now, Tick duration, LeaseRole role) {
  const NodeId slot = role == LeaseRole::Leadership ? kNoNode : holder;
  if (role == LeaseRole::Leadership && lease_conflicts(holder, now)) {
    throw Error(Errc::Conflict, "leadership lease held by another node");
  }
  Lease l{holder, now, duration, options_.lease_slack};
  leases_[{role, slot}] = l;
  return l;
}

std::optional<Lease> TrustedCore::granted_lease(LeaseRole role, NodeId holder) const {
  const NodeId slot = role == LeaseRole::Leadership ? kNoNode : holder;
  auto it = leases_.find({role, slot});
  if (it == leases_.end()) return std::nullopt;
  return it->second;
}

void TrustedCore::revoke_leases(LeaseRole role) {
  std::erase_if(leases_, [role](const auto& kv) { return kv.first.first == role; });
}

namespace {

Bytes link_ack_body(const ChannelId& data_cq, Counter acked) {
  ByteWriter w;
  w.str("link-ack").channel(data_cq).u64(acked);
  return std::move(w).take();
}

}  // namespace

Mac TrustedCore::seal_link_ack(const ChannelId& data_cq, Counter acked) const {
  auto it = keys_.find(data_cq.reversed());
  if (it == keys_.end()) throw Error(Errc::NoKey, "no reverse key for " + to_string(data_cq));
  return crypto::hmac_sha256(it->second.mac_key, link_ack_body(data_cq, acked));
}

bool TrustedCore::open_link_ack(const ChannelId& data_cq, Counter acked, const Mac& tag) const {
  auto it = keys_.find(data_cq.reversed());
  if (it == keys_.end()) return false;
  return crypto::tag_equal(crypto::hmac_sha256(it->second.mac_key, link_ack_body(data_cq, acked)),
                           tag);
}

Counter TrustedCore::send_counter(const ChannelId& cq) const {
  auto it = send_counters_.find(cq);
  return it == send_counters_.end() ? 0 : it->second;
}

Counter TrustedCore::recv_counter(const ChannelId& cq) const {
  auto it = recv_counters_.find(cq);
  return it == recv_counters_.end() ? 0 : it->second;
}

std::size_t TrustedCore::buffered(const ChannelId& cq) const {
  auto it = future_.find(cq);
  return it == future_.end() ? 0 : it->second.size();
}

}  // namespace shieldrep::tcb
