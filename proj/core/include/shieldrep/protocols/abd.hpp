#pragma once

#include <map>

#include "shieldrep/protocols/replica.hpp"

namespace shieldrep::protocols {

inline constexpr MessageKind kAbdReadTs{0x300};
inline constexpr MessageKind kAbdTsReply{0x301};
inline constexpr MessageKind kAbdWrite{0x302};
inline constexpr MessageKind kAbdWriteAck{0x303};
inline constexpr MessageKind kAbdRead{0x304};
inline constexpr MessageKind kAbdReadReply{0x305};

/// Write timestamp for a coordinator: one past the largest counter among the
/// quorum's replies and the coordinator's own last issued counter.
kvstore::Version next_timestamp(const std::vector<kvstore::Version>& seen,
                                std::uint64_t last_issued, NodeId coordinator);

/// Multi-writer ABD register per key. Every replica coordinates the
/// requests it receives. Writes take a timestamp query round and a write
/// round; reads take one round when a quorum agrees on the newest
/// timestamp, else a second write-back round.
class AbdReplica final : public Replica {
 public:
  AbdReplica(const attestation::ProvisionBundle& bundle, ReplicaEnv env);

  std::size_t in_flight_ops() const { return ops_.size(); }

 protected:
  void on_request(const ClientRequest& req, ReplyFn reply) override;
  void on_members_changed(const attestation::MembershipUpdate& u) override;
  void on_sync_delta(ByteReader& r) override;

 private:
  enum class Phase { QueryTs, QueryValue, Store };

  struct Reading {
    kvstore::Version ts;
    bool found = false;
    Bytes value;
  };

  struct Op {
    ClientRequest req;
    ReplyFn reply;
    Phase phase = Phase::QueryTs;
    std::map<NodeId, Reading> replies;
    std::set<NodeId> acks;
    kvstore::Version ts;
    bool found = false;
    Bytes value;
  };

  void on_read_ts(const transport::Inbound& in);
  void on_ts_reply(const transport::Inbound& in);
  void on_write(const transport::Inbound& in);
  void on_write_ack(const transport::Inbound& in);
  void on_read(const transport::Inbound& in);
  void on_read_reply(const transport::Inbound& in);

  Reading local(const Bytes& key);
  void store_phase(std::uint64_t op_id, Op& op);
  void store_if_newer(const Bytes& key, const Bytes& value, kvstore::Version ts,
                      ClientId client, RequestId rid);
  void finish(std::uint64_t op_id, Reply reply);

  std::uint64_t next_op_ = 1;
  std::map<std::uint64_t, Op> ops_;
  std::map<Bytes, std::uint64_t> issued_;  // last counter this node issued per key
};

}  // namespace shieldrep::protocols
