#pragma once

#include <functional>
#include <map>

#include "shieldrep/transport/adversary.hpp"
#include "shieldrep/transport/nic.hpp"

namespace shieldrep::transport {

struct NetConfig {
  Tick gst = 0;
  Tick delta = 4;
  std::uint64_t seed = 1;
  bool record_wire = false;  // keep every transmitted frame (secret scans)
};

struct WireRecord {
  Tick at = 0;
  ChannelId link;
  Bytes frame;
};

struct NetStats {
  std::uint64_t frames = 0;
  std::uint64_t bytes = 0;
  std::uint64_t delivered = 0;
  std::uint64_t undeliverable = 0;  // destination detached
};

/// Discrete-event network under partial synchrony. Frames wait in an
/// adversary-visible in-flight set until their delivery tick, then land in
/// the destination endpoint's RX ring. Same seed, same schedule.
class SimNetwork final : public Nic {
 public:
  SimNetwork(NetConfig config, AdversaryPolicy policy);

  void attach(NodeId owner, std::uint16_t lane, Endpoint* ep) override;
  void detach(NodeId owner, std::uint16_t lane) override;
  void transmit(const ChannelId& link, Bytes frame) override;

  /// Runs the adversary's script for `now`, then delivers every frame due
  /// at or before `now` in (deliver_at, seq) order.
  void advance(Tick now);

  /// Called with nodes whose host the adversary crashes (CrashTee).
  void set_crash_handler(std::function<void(NodeId)> handler) { on_crash_ = std::move(handler); }

  std::optional<Tick> next_delivery() const;
  std::size_t in_flight() const { return in_flight_.size(); }
  std::vector<NetEvent>& in_flight_events() { return in_flight_; }
  Tick now() const { return now_; }

  const NetStats& stats() const { return stats_; }
  const Adversary& adversary() const { return adversary_; }
  const std::vector<WireRecord>& wire_log() const { return wire_log_; }

 private:
  NetConfig config_;
  Adversary adversary_;
  Tick now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::map<std::pair<NodeId, std::uint16_t>, Endpoint*> endpoints_;
  std::vector<NetEvent> in_flight_;
  std::function<void(NodeId)> on_crash_;
  NetStats stats_;
  std::vector<WireRecord> wire_log_;
};

}  // namespace shieldrep::transport
