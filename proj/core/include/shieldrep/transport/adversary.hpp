#pragma once

#include <deque>
#include <map>
#include <random>
#include <set>

#include "shieldrep/core/config.hpp"

namespace shieldrep::transport {

/// A frame in transit. `msg` lives in adversary-visible memory.
struct NetEvent {
  Tick deliver_at = 0;
  std::uint64_t seq = 0;
  ChannelId channel;
  Bytes msg;
  Tick sent_at = 0;
  bool injected = false;  // duplicate or replay created by the adversary
};

struct AdversaryStats {
  std::uint64_t dropped = 0;
  std::uint64_t partition_dropped = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t tampered = 0;
  std::uint64_t replayed = 0;
  std::uint64_t delayed = 0;
};

/// Dolev-Yao attacker over raw frames. It sees every byte on the wire but
/// holds no keys. Probabilistic faults stop violating the delivery bound
/// once GST has passed (partitioned channels excepted).
class Adversary {
 public:
  Adversary(AdversaryPolicy policy, Tick gst, Tick delta, std::uint64_t seed);

  /// A fresh frame was transmitted at `now`; returns the copies to schedule
  /// (possibly none, possibly mutated, possibly duplicated).
  std::vector<NetEvent> on_transmit(const ChannelId& link, const Bytes& frame, Tick now);

  /// Partition crossing: exactly one endpoint inside the partitioned set.
  bool blocked(const ChannelId& link) const;
  bool after_gst(Tick now) const { return now >= gst_; }
  Tick delta() const { return delta_; }
  /// Latest tick a frame sent at `sent_at` may be delivered at, if bounded.
  std::optional<Tick> bound_for(const ChannelId& link, Tick sent_at, Tick now) const;

  const AdversaryPolicy& policy() const { return policy_; }
  const AdversaryStats& stats() const { return stats_; }
  std::mt19937_64& rng() { return rng_; }

  // Scripted-state accessors used by adversary_step.
  friend std::vector<NodeId> adversary_step(Adversary& adv, std::vector<NetEvent>& in_flight,
                                            Tick now, std::uint64_t& next_seq);

 private:
  Tick uniform(Tick lo, Tick hi);
  bool coin(double p);
  void tamper(Bytes& frame, bool payload_byte);
  void capture(const ChannelId& link, const Bytes& frame);
  bool matches(const std::optional<ChannelId>& pattern, const ChannelId& link) const;

  AdversaryPolicy policy_;
  Tick gst_;
  Tick delta_;
  std::mt19937_64 rng_;
  std::size_t next_script_ = 0;
  std::set<NodeId> partition_;
  std::vector<std::optional<ChannelId>> tamper_next_;
  std::vector<std::pair<std::optional<ChannelId>, Tick>> hold_until_;
  std::map<ChannelId, std::deque<Bytes>> captured_;
  std::map<ChannelId, Tick> last_deliver_;
  AdversaryStats stats_;
};

/// Applies the scripted actions due at `now` to the in-flight set: replays
/// captured frames, holds channels, drops partition-crossing frames, and
/// returns nodes whose host the adversary crashes.
std::vector<NodeId> adversary_step(Adversary& adv, std::vector<NetEvent>& in_flight, Tick now,
                                   std::uint64_t& next_seq);

}  // namespace shieldrep::transport
