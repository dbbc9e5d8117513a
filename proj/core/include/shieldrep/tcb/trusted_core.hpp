#pragma once

#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "shieldrep/core/message.hpp"
#include "shieldrep/core/trace.hpp"
#include "shieldrep/core/types.hpp"
#include "shieldrep/tcb/lease.hpp"

namespace shieldrep::tcb {

enum class Status { Normal, ViewChange, Recovering, Excised };

std::string_view to_string(Status s);

struct ChannelKeys {
  Key mac_key{};
  Key enc_key{};

  friend bool operator==(const ChannelKeys&, const ChannelKeys&) = default;
};

enum class RejectReason { BadMac, StaleCounter, WrongView, Malformed };

std::string_view to_string(RejectReason r);

/// A message released to the protocol layer, in counter order.
struct Delivered {
  Bytes payload;  // plaintext
  SequenceTuple tuple;
  MessageKind kind;
  Digest digest{};
};

struct AcceptNow {
  Delivered msg;
};
struct BufferFuture {
  SequenceTuple tuple;
};
struct Reject {
  RejectReason reason;
};
using Verdict = std::variant<AcceptNow, BufferFuture, Reject>;

enum class DedupeResult { Fresh, Duplicate };

struct CoreOptions {
  bool confidential = false;
  std::size_t future_capacity = 1024;
  Tick lease_slack = 4;
};

/// Per-replica trusted state: keys, per-channel counters, client table,
/// out-of-order buffer and lease table. Owned by exactly one replica step
/// function; the untrusted host only sees what shield/verify hand out.
class TrustedCore {
 public:
  TrustedCore(NodeId id, CoreOptions options, Trace* trace = nullptr);

  NodeId id() const { return id_; }
  Status status() const { return status_; }
  void set_status(Status s) { status_ = s; }
  ViewId view() const { return view_; }
  void set_view(ViewId v) { view_ = v; }
  bool confidential() const { return options_.confidential; }
  const CoreOptions& options() const { return options_; }

  // Provisioning (only the attestation flow calls these).
  void install_channel(const ChannelId& cq, const ChannelKeys& keys);
  void install_client_key(ClientId client, const Key& key);
  bool has_channel(const ChannelId& cq) const { return keys_.contains(cq); }
  /// Marks the end of provisioning; records the Trusted event.
  void mark_trusted();
  bool trusted() const { return trusted_; }

  /// Increments the channel's send counter, then binds (view, cq, cnt) and
  /// MACs header+payload. Throws Error(NoKey) / Error(NotOperational).
  ShieldedMessage shield_request(std::span<const std::uint8_t> req, const ChannelId& cq,
                                 MessageKind kind);

  /// Full verification of one inbound message.
  Verdict verify_request(const ShieldedMessage& msg);
  /// Decode-then-verify over raw wire bytes; undecodable input is Malformed.
  Verdict verify_frame(std::span<const std::uint8_t> wire);

  /// Releases buffered messages that continue the rcnt sequence.
  std::vector<Delivered> drain_ready(const ChannelId& cq);

  DedupeResult dedupe_client(ClientId client, RequestId rid);
  bool authenticate_client(ClientId client, std::span<const std::uint8_t> body,
                           const Mac& tag) const;

  /// Throws Error(Conflict) if a Leadership lease to another holder is still
  /// valid in the granter view. Re-granting to the same holder renews.
  Lease grant_lease(NodeId holder, Tick now, Tick duration,
                    LeaseRole role = LeaseRole::Leadership);
  /// True when granting a Leadership lease to `holder` now would conflict.
  bool lease_conflicts(NodeId holder, Tick now) const;
  std::optional<Lease> granted_lease(LeaseRole role, NodeId holder = kNoNode) const;
  void revoke_leases(LeaseRole role);

  // Link-level acknowledgements of the data channel `data_cq` (sent back by
  // its receiver). MAC'd under the reverse channel key.
  Mac seal_link_ack(const ChannelId& data_cq, Counter acked) const;
  bool open_link_ack(const ChannelId& data_cq, Counter acked, const Mac& tag) const;

  Counter send_counter(const ChannelId& cq) const;
  Counter recv_counter(const ChannelId& cq) const;
  std::size_t buffered(const ChannelId& cq) const;
  std::size_t client_table_size() const { return client_table_.size(); }

 private:
  Reject reject(RejectReason reason, const ShieldedMessage* msg, const Digest* digest);
  std::optional<Bytes> open_payload(const ShieldedMessage& msg, const ChannelKeys& keys) const;

  NodeId id_;
  CoreOptions options_;
  Trace* trace_;
  Status status_ = Status::Normal;
  ViewId view_ = 1;
  bool trusted_ = false;
  std::map<ChannelId, ChannelKeys> keys_;
  std::map<ClientId, Key> client_keys_;
  std::map<ChannelId, Counter> send_counters_;
  std::map<ChannelId, Counter> recv_counters_;
  std::map<ClientId, RequestId> client_table_;
  std::map<ChannelId, std::map<Counter, Delivered>> future_;
  std::map<std::pair<LeaseRole, NodeId>, Lease> leases_;
};

}  // namespace shieldrep::tcb
