#pragma once

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>

#include "shieldrep/attestation/cas.hpp"
#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/config.hpp"
#include "shieldrep/core/request.hpp"
#include "shieldrep/kvstore/store.hpp"
#include "shieldrep/tcb/trusted_core.hpp"
#include "shieldrep/transport/endpoint.hpp"

namespace shieldrep::protocols {

/// Client request plus the client's MAC over its canonical encoding.
struct SignedRequest {
  ClientRequest req;
  Mac mac{};
};

SignedRequest sign_request(const ClientRequest& req, const Key& client_key);

enum class ReplyStatus { Ok, NotLeader, NotTail, Duplicate, BadAuth, Refused };

std::string_view to_string(ReplyStatus s);

struct Reply {
  ReplyStatus status = ReplyStatus::Ok;
  bool found = false;
  Bytes value;
  NodeId leader_hint = kNoNode;
};

using ReplyFn = std::function<void(const Reply&)>;

/// Per-operation message accounting (instrumentation, outside the trusted
/// boundary): broadcast rounds initiated for the op and point-to-point hops.
struct OpKey {
  ClientId client;
  RequestId rid = 0;

  friend auto operator<=>(const OpKey&, const OpKey&) = default;
};

struct OpStats {
  std::uint32_t broadcast_rounds = 0;
  std::uint32_t forward_hops = 0;
  std::uint32_t ack_hops = 0;
};

using OpMetrics = std::map<OpKey, OpStats>;

struct ReplicaOptions {
  Protocol protocol = Protocol::Raft;
  std::size_t f = 1;
  TimingParams timing;
  bool confidential = false;
  bool shielded = true;
  std::size_t window = 32;
  std::size_t batch = 1;
  std::uint64_t seed = 1;
  std::size_t store_capacity = 1u << 20;
};

struct ReplicaEnv {
  transport::Nic* nic = nullptr;
  Trace* trace = nullptr;
  attestation::Cas* cas = nullptr;
  OpMetrics* metrics = nullptr;
  ReplicaOptions options;
};

// Control kinds (a Recovering core may send these).
inline constexpr MessageKind kSyncRequest{0x10};
inline constexpr MessageKind kSyncSnapshot{0x11};
inline constexpr MessageKind kSyncDelta{0x12};
// Shared protocol kind: liveness heartbeat.
inline constexpr MessageKind kHeartbeat{0x180};

/// Common replica scaffolding: trusted core, store, endpoint, client
/// admission, membership updates, liveness tracking and shadow-replica sync.
/// Subclasses implement one protocol's state machine.
class Replica {
 public:
  Replica(const attestation::ProvisionBundle& bundle, ReplicaEnv env);
  virtual ~Replica();
  Replica(const Replica&) = delete;
  Replica& operator=(const Replica&) = delete;

  NodeId id() const { return id_; }
  Protocol protocol() const { return env_.options.protocol; }

  /// Client entry point (direct call). Checks the MAC and the status, then
  /// hands over to the protocol.
  void submit(const SignedRequest& req, ReplyFn reply);

  /// One scheduler step: receive, protocol timers, flush.
  void step(Tick now);
  void crash();
  bool crashed() const { return crashed_; }

  tcb::Status status() const { return core_.status(); }
  tcb::TrustedCore& core() { return core_; }
  const tcb::TrustedCore& core() const { return core_; }
  kvstore::Store& store() { return store_; }
  const kvstore::Store& store() const { return store_; }
  transport::Endpoint& endpoint() { return *ep_; }
  const std::vector<NodeId>& members() const { return members_; }

  /// CAS callback; the return value is this node's acknowledgement.
  bool on_membership(const attestation::MembershipUpdate& u);
  /// Protocol progress marker reported to the CAS (rounds for AllConcur).
  virtual std::uint64_t progress() const { return 0; }

  /// Enter shadow mode and fetch state from `designated`.
  void start_join(NodeId designated);
  bool joining() const { return joining_; }

  /// Whether this replica may serve linearizable leader reads right now.
  virtual bool holds_leader_lease(Tick /*now*/) const { return false; }
  /// Current protocol view (term or membership epoch).
  virtual ViewId protocol_view() const { return epoch_; }
  /// Leader/head this replica currently believes in, if any.
  virtual NodeId known_leader() const { return kNoNode; }

  std::uint64_t applied_count() const { return applied_count_; }

 protected:
  virtual void on_request(const ClientRequest& req, ReplyFn reply) = 0;
  virtual void on_tick() {}
  virtual void on_members_changed(const attestation::MembershipUpdate& /*u*/) {}
  virtual void on_suspect_expired(NodeId /*peer*/) {}
  /// Protocol state shipped to a shadow alongside the store snapshot.
  virtual void write_sync_state(ByteWriter& /*w*/) const {}
  virtual void read_sync_state(ByteReader& /*r*/) {}
  /// One delta from the sync source.
  virtual void on_sync_delta(ByteReader& /*r*/) {}
  /// Called on the sync source when a shadow's snapshot has been sent.
  virtual void on_shadow_synced(NodeId /*shadow*/) {}

  void send(NodeId to, MessageKind kind, Bytes payload);
  /// Sends to every other member; counts one broadcast round for `op`.
  void broadcast(MessageKind kind, const Bytes& payload, const OpKey* op = nullptr);
  void count_round(const OpKey& op);
  void count_hop(const OpKey& op, bool ack);

  std::size_t quorum() const;
  std::vector<NodeId> peers() const;

  /// Store write plus the Commit trace record.
  void apply_write(const Bytes& key, const Bytes& value, kvstore::Version ts,
                   std::uint64_t order_index, ClientId client, RequestId rid, ViewId view);
  /// Integrity-checked local read. A tampered slot is reported, not served.
  Reply read_local(const Bytes& key);

  /// Sends one delta to every shadow currently syncing from this node.
  void publish_delta(const Bytes& delta);
  void drop_subscriber(NodeId shadow);
  const std::set<NodeId>& subscribers() const { return subscribers_; }

  /// Liveness tracking via heartbeats and per-peer liveness leases.
  void enable_liveness(bool on) { liveness_ = on; }
  std::uint64_t last_seen(NodeId peer) const;
  void note_seen(NodeId peer, std::uint64_t marker);
  bool suspected(NodeId peer) const { return reported_.contains(peer); }

  void handle(MessageKind kind, transport::Handler h);

  Tick now() const { return now_; }
  const TimingParams& timing() const { return env_.options.timing; }
  const ReplicaOptions& options() const { return env_.options; }
  Trace* trace() { return env_.trace; }
  attestation::Cas* cas() { return env_.cas; }
  std::mt19937_64& rng() { return rng_; }

  NodeId id_;
  std::vector<NodeId> members_;
  ViewId epoch_ = 1;

 private:
  void liveness_tick();
  void on_sync_request(const transport::Inbound& in);
  void on_sync_snapshot(const transport::Inbound& in);

  ReplicaEnv env_;
  tcb::TrustedCore core_;
  kvstore::Store store_;
  std::unique_ptr<transport::LinkSecurity> security_;
  std::unique_ptr<transport::Endpoint> ep_;
  std::mt19937_64 rng_;
  Tick now_ = 0;
  bool crashed_ = false;
  bool joining_ = false;
  NodeId sync_source_ = kNoNode;
  std::set<NodeId> expected_shadows_;
  std::set<NodeId> subscribers_;
  bool liveness_ = false;
  Tick next_heartbeat_ = 0;
  std::set<NodeId> reported_;
  std::map<NodeId, std::uint64_t> last_seen_;
  std::uint64_t applied_count_ = 0;
};

std::unique_ptr<Replica> make_replica(const attestation::ProvisionBundle& bundle, ReplicaEnv env);

}  // namespace shieldrep::protocols
