#pragma once

#include <map>

#include "shieldrep/protocols/digraph.hpp"
#include "shieldrep/protocols/replica.hpp"

namespace shieldrep::protocols {

inline constexpr MessageKind kAcRound{0x500};
inline constexpr MessageKind kAcForwarded{0x501};

/// Leaderless atomic broadcast in lockstep rounds. Each member sends one
/// batch per round to every other member; a round commits once a batch
/// from every contributing member is present, in member-id order. Rounds
/// start on demand. Reads are local.
class AllConcurReplica final : public Replica {
 public:
  AllConcurReplica(const attestation::ProvisionBundle& bundle, ReplicaEnv env);

  std::uint64_t progress() const override { return round_; }
  ViewId protocol_view() const override { return epoch_; }
  std::uint64_t committed_round() const { return committed_; }
  const Digraph& overlay() const { return overlay_; }

 protected:
  void on_request(const ClientRequest& req, ReplyFn reply) override;
  void on_tick() override;
  void on_members_changed(const attestation::MembershipUpdate& u) override;
  void on_suspect_expired(NodeId peer) override;
  void write_sync_state(ByteWriter& w) const override;
  void read_sync_state(ByteReader& r) override;
  void on_sync_delta(ByteReader& r) override;

 private:
  struct Write {
    ClientId client;
    RequestId rid = 0;
    Bytes key;
    Bytes value;
  };
  using Batch = std::vector<Write>;

  void on_round(const transport::Inbound& in);
  void on_forwarded(const transport::Inbound& in);

  std::vector<NodeId> contributors(std::uint64_t r) const;
  bool blocked(std::uint64_t r) const;
  void progress_rounds();
  void commit(std::uint64_t r);
  void store_batch(std::uint64_t r, NodeId origin, Batch b);

  Digraph overlay_;
  std::uint64_t round_ = 1;
  std::uint64_t committed_ = 0;
  std::uint64_t order_index_ = 0;
  bool started_ = false;
  Batch queued_;
  std::map<OpKey, ReplyFn> replies_;
  std::map<std::uint64_t, std::map<NodeId, Batch>> received_;
  std::map<NodeId, std::uint64_t> active_from_;
  std::map<NodeId, std::uint64_t> cut_;
  std::map<NodeId, std::uint64_t> reported_round_;
  std::map<NodeId, std::uint64_t> drop_after_;  // shadow -> last round it syncs
};

}  // namespace shieldrep::protocols
