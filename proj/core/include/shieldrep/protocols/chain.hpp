#pragma once

#include <map>

#include "shieldrep/protocols/replica.hpp"

namespace shieldrep::protocols {

inline constexpr MessageKind kChainForward{0x400};
inline constexpr MessageKind kChainAck{0x401};
inline constexpr MessageKind kChainTailHandoff{0x402};

/// Chain replication over the membership order. The head sequences and
/// forwards writes, the tail serves reads and acknowledges; acks travel
/// back to the head, which answers the client. Failed nodes are excised
/// through the CAS and the chain relinks around them.
class ChainReplica final : public Replica {
 public:
  ChainReplica(const attestation::ProvisionBundle& bundle, ReplicaEnv env);

  bool is_head() const { return !members_.empty() && members_.front() == id_; }
  bool is_tail() const { return !members_.empty() && members_.back() == id_; }
  std::uint64_t applied_seq() const { return applied_seq_; }
  std::uint64_t acked_seq() const { return acked_seq_; }
  bool serves_reads() const { return is_tail() && reads_ready_; }

  ViewId protocol_view() const override { return epoch_; }
  NodeId known_leader() const override { return members_.empty() ? kNoNode : members_.front(); }

 protected:
  void on_request(const ClientRequest& req, ReplyFn reply) override;
  void on_members_changed(const attestation::MembershipUpdate& u) override;
  void write_sync_state(ByteWriter& w) const override;
  void read_sync_state(ByteReader& r) override;
  void on_sync_delta(ByteReader& r) override;

 private:
  struct Write {
    std::uint64_t seq = 0;
    ClientId client;
    RequestId rid = 0;
    Bytes key;
    Bytes value;
  };

  void on_forward(const transport::Inbound& in);
  void on_ack(const transport::Inbound& in);
  void on_handoff(const transport::Inbound& in);

  NodeId successor() const;
  NodeId predecessor() const;
  void apply(const Write& w);
  void forward(const Write& w);
  void acked_upto(std::uint64_t seq);
  void drain_future();

  std::uint64_t last_seq_ = 0;
  std::uint64_t applied_seq_ = 0;
  std::uint64_t acked_seq_ = 0;
  std::uint64_t handoff_seq_ = 0;
  bool reads_ready_ = true;
  std::map<std::uint64_t, Write> pending_;  // applied here, not yet acked
  std::map<std::uint64_t, Write> future_;   // arrived ahead of a gap
  std::map<std::uint64_t, std::pair<ReplyFn, OpKey>> replies_;
  std::map<std::uint64_t, OpKey> ops_;      // seq -> op, for hop accounting
};

}  // namespace shieldrep::protocols
