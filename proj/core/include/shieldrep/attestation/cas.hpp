#pragma once

#include <functional>
#include <map>
#include <random>
#include <set>
#include <variant>

#include "shieldrep/attestation/attestation.hpp"
#include "shieldrep/core/trace.hpp"
#include "shieldrep/tcb/trusted_core.hpp"

namespace shieldrep::attestation {

enum class DenyReason { BadQuote, BadNonce, UnknownMeasurement, NoQuorum, NotAttested };

std::string_view to_string(DenyReason r);

struct AttestationSession {
  enum class State { Challenged, Quoted, Provisioned, Failed };

  std::uint64_t id = 0;
  std::string machine;
  Nonce nonce{};
  Key ephemeral_key{};
  State state = State::Challenged;
};

/// Secrets and configuration released to one attested node over the secure
/// CAS channel.
struct ProvisionBundle {
  NodeId id;
  ViewId epoch = 0;
  std::vector<NodeId> members;
  std::map<ChannelId, tcb::ChannelKeys> channels;
  std::map<ClientId, Key> client_keys;
};

struct Provisioned {
  NodeId id;
};
struct Denied {
  DenyReason reason;
};
using AttestationResult = std::variant<Provisioned, Denied>;

enum class UpdateKind { ShadowAdded, ShadowDropped, Promoted, Removed };

/// Per-recipient membership notification. `channels` carries only keys for
/// channels the recipient is an endpoint of.
struct MembershipUpdate {
  UpdateKind kind = UpdateKind::Promoted;
  NodeId subject;
  ViewId epoch = 0;
  std::vector<NodeId> members;
  std::map<ChannelId, tcb::ChannelKeys> channels;
  NodeId designated = kNoNode;   // ShadowAdded: the sync source
  std::uint64_t cut = 0;         // Removed: subject's last included round
  std::uint64_t activation = 0;  // Promoted: subject's first round
};

/// Callbacks a live node registers with the CAS. `on_update` returns the
/// node's acknowledgement; `progress` reports protocol progress (a round
/// number where that matters, else 0).
struct MemberHooks {
  std::function<bool(const MembershipUpdate&)> on_update;
  std::function<std::uint64_t()> progress;
};

struct CasOptions {
  std::size_t f = 1;
  std::size_t client_count = 0;
  bool confidential = false;
  std::vector<std::uint16_t> lanes{0};
};

/// Configuration and Attestation Service: verifies quotes, hands out fresh
/// node ids and channel keys, and owns the membership. Logically a single
/// trusted instance; all calls are serialized by the caller.
class Cas {
 public:
  Cas(Key master, std::uint64_t seed, CasOptions options, Trace* trace = nullptr);

  // Setup: simulated hardware roots and the expected code.
  void register_machine(const std::string& machine, const Key& hw_key);
  void expect(const Measurement& m);

  AttestationSession begin(const std::string& machine);
  AttestationResult complete(AttestationSession& session, const SignedQuote& quote);

  /// Bootstrap membership from attested ids; returns each node's bundle.
  std::map<NodeId, ProvisionBundle> form_cluster(const std::vector<NodeId>& ids);

  /// Admits an attested node as a shadow of `designated`. Every live member
  /// is told and must acknowledge; fewer than a quorum of acks aborts with
  /// Error(JoinDenied), as does an unattested id.
  ProvisionBundle join_cluster(NodeId node, NodeId designated);
  /// Shadow finished syncing: make it a full member.
  void promote(NodeId node);

  /// A member's liveness lease on `suspect` expired. Excision happens once
  /// every other live member has reported; returns true if it did.
  bool report_suspect(NodeId reporter, NodeId suspect, std::uint64_t last_seen);
  /// The reporter heard from `suspect` again; withdraws its report unless
  /// the suspect is already gone. Returns true if withdrawn.
  bool retract_suspect(NodeId reporter, NodeId suspect);
  /// Operator-driven removal (reconfiguration).
  void excise(NodeId node);

  void register_hooks(NodeId node, MemberHooks hooks);
  /// The node's host went down: it stops being live (membership unchanged).
  void node_crashed(NodeId node);

  const std::vector<NodeId>& members() const { return members_; }
  std::vector<NodeId> live_members() const;
  bool is_member(NodeId n) const;
  bool is_attested(NodeId n) const { return attested_.contains(n); }
  bool is_shadow(NodeId n) const { return shadows_.contains(n); }
  ViewId epoch() const { return epoch_; }
  std::size_t quorum() const;
  Key client_key(ClientId c) const;
  tcb::ChannelKeys channel_keys(const ChannelId& cq) const;
  /// Every key the CAS has released so far (for leak scans).
  std::vector<Key> released_keys() const;

 private:
  void broadcast(MembershipUpdate base, NodeId extra = kNoNode);
  std::map<ChannelId, tcb::ChannelKeys> channels_between(NodeId a, NodeId b) const;
  void remove(NodeId node, std::uint64_t cut);

  Key master_;
  std::mt19937_64 rng_;
  CasOptions options_;
  Trace* trace_;
  std::map<std::string, Key> hw_keys_;
  std::set<Measurement> expected_;
  std::uint64_t next_session_ = 1;
  std::uint32_t next_fresh_id_ = 0;
  std::set<NodeId> attested_;
  std::map<NodeId, std::string> machine_of_;
  std::vector<NodeId> members_;
  std::map<NodeId, NodeId> shadows_;  // shadow -> designated
  std::map<NodeId, ViewId> enrolled_epoch_;
  std::map<NodeId, MemberHooks> hooks_;
  std::map<NodeId, std::map<NodeId, std::uint64_t>> suspicions_;  // suspect -> reporter -> round
  ViewId epoch_ = 1;
  std::set<ChannelId> released_;
};

}  // namespace shieldrep::attestation
