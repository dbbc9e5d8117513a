#pragma once

#include <map>

#include "shieldrep/protocols/replica.hpp"

namespace shieldrep::protocols {

inline constexpr MessageKind kRaftRequestVote{0x200};
inline constexpr MessageKind kRaftVote{0x201};
inline constexpr MessageKind kRaftAppend{0x202};
inline constexpr MessageKind kRaftAppendAck{0x203};
inline constexpr MessageKind kRaftCommit{0x204};
inline constexpr MessageKind kRaftCommitAck{0x205};

/// Raft with a trusted uncommitted queue and a two-phase write path:
/// replicate/ack (entry becomes replicated on a quorum), then commit/ack
/// (followers apply; the leader applies and answers once a quorum applied).
/// Reads run at the leader under a quorum leader lease.
class RaftReplica final : public Replica {
 public:
  enum class Role { Follower, Candidate, Leader };

  struct Entry {
    ViewId term = 0;
    bool noop = false;
    ClientId client;
    RequestId rid = 0;
    Bytes key;
    Bytes value;
  };

  RaftReplica(const attestation::ProvisionBundle& bundle, ReplicaEnv env);

  Role role() const { return role_; }
  ViewId term() const { return term_; }
  std::uint64_t log_size() const { return log_.size(); }
  std::uint64_t replicated_index() const { return commit_index_; }
  std::uint64_t applied_index() const { return applied_; }
  const std::vector<Entry>& log() const { return log_; }

  bool holds_leader_lease(Tick now) const override;
  ViewId protocol_view() const override { return term_; }
  NodeId known_leader() const override { return leader_; }

 protected:
  void on_request(const ClientRequest& req, ReplyFn reply) override;
  void on_tick() override;
  void on_members_changed(const attestation::MembershipUpdate& u) override;
  void write_sync_state(ByteWriter& w) const override;
  void read_sync_state(ByteReader& r) override;
  void on_sync_delta(ByteReader& r) override;

 private:
  struct PendingRead {
    ClientRequest req;
    ReplyFn reply;
  };

  void on_request_vote(const transport::Inbound& in);
  void on_vote(const transport::Inbound& in);
  void on_append(const transport::Inbound& in);
  void on_append_ack(const transport::Inbound& in);
  void on_commit(const transport::Inbound& in);
  void on_commit_ack(const transport::Inbound& in);

  void become_follower(ViewId term);
  void become_leader();
  void start_election();
  void reset_election_timer();
  void report_view(ViewId term);
  void stale(const transport::Inbound& in);

  void replicate(bool heartbeat);
  void send_append(NodeId peer, bool force);
  void advance_commit();
  void leader_apply();
  void follower_apply();
  void apply_entry(std::uint64_t index);
  void serve_reads();
  void fail_pending(ReplyStatus status);

  ViewId last_log_term() const { return log_.empty() ? 0 : log_.back().term; }

  Role role_ = Role::Follower;
  ViewId term_ = 1;
  NodeId voted_for_ = kNoNode;
  NodeId leader_ = kNoNode;
  ViewId reported_view_ = 0;
  std::vector<Entry> log_;
  std::uint64_t commit_index_ = 0;  // replicated on a quorum
  std::uint64_t known_commit_ = 0;  // follower: commit point learned from the leader
  std::uint64_t match_known_ = 0;   // follower: prefix known to match the leader
  std::uint64_t applied_ = 0;
  Tick election_deadline_ = 0;
  Tick next_heartbeat_ = 0;
  std::set<NodeId> votes_;

  // Leader state.
  std::map<NodeId, std::uint64_t> next_index_;
  std::map<NodeId, std::uint64_t> match_index_;
  std::map<NodeId, std::uint64_t> applied_at_;
  std::map<NodeId, tcb::Lease> held_leases_;
  std::map<std::uint64_t, std::pair<ReplyFn, OpKey>> pending_writes_;
  std::vector<PendingRead> pending_reads_;
  std::uint64_t noop_index_ = 0;
  std::uint64_t shipped_ = 0;
  std::uint64_t commit_announced_ = 0;
};

}  // namespace shieldrep::protocols
