#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shieldrep/core/types.hpp"

namespace shieldrep {

enum class Protocol { Abd, Raft, Chain, AllConcur };

std::string_view to_string(Protocol p);
// Accepts r-abd | r-raft | r-cr | r-allconcur (case-insensitive).
std::optional<Protocol> protocol_from_string(std::string_view s);

enum class KeyDistribution { Uniform, Zipfian };

struct WorkloadSpec {
  std::size_t key_count = 10'000;
  KeyDistribution distribution = KeyDistribution::Zipfian;
  double zipf_theta = 0.99;
  double read_ratio = 0.90;
  std::size_t value_size = 256;
  std::size_t op_count = 100;
  std::size_t client_count = 8;
};

/// Probabilistic faults applied to fresh frames on a channel.
struct ChannelFaults {
  double drop_prob = 0.0;
  double dup_prob = 0.0;
  double tamper_prob = 0.0;
  // Probability that a delivered frame is captured and re-injected later.
  double replay_prob = 0.0;
  Tick reorder_window = 0;

  bool benign() const {
    return drop_prob == 0 && dup_prob == 0 && tamper_prob == 0 && replay_prob == 0 &&
           reorder_window == 0;
  }
};

enum class ActionType { Partition, Heal, ReplayCaptured, TamperNext, DelayAll, CrashTee };

std::string_view to_string(ActionType a);
std::optional<ActionType> action_from_string(std::string_view s);

struct ScriptedAction {
  Tick at = 0;
  ActionType type = ActionType::Heal;
  std::vector<NodeId> nodes;         // Partition set, CrashTee target
  std::optional<ChannelId> channel;  // ReplayCaptured/TamperNext/DelayAll; nullopt = any
  std::uint32_t count = 1;           // ReplayCaptured
  Tick ticks = 0;                    // DelayAll
};

/// Network attacker description: defaults for every channel, per-channel
/// overrides, and a tick-ordered script.
struct AdversaryPolicy {
  std::string name = "identity";
  ChannelFaults defaults;
  std::map<ChannelId, ChannelFaults> per_channel;
  std::vector<ScriptedAction> scripted;

  const ChannelFaults& faults_for(const ChannelId& cq) const;
};

/// Scripted fresh-node join (recovery) for a scenario.
struct JoinSpec {
  Tick at = 0;
  NodeId designated{0};
  bool genuine = true;          // false: tampered code identity
  bool has_hw_key = true;       // false: attacker without a hardware root
  std::optional<Tick> crash_at; // crash the joiner at this tick
};

/// Protocol and link timers, in ticks.
struct TimingParams {
  Tick heartbeat_interval = 0;
  Tick lease_duration = 0;
  Tick lease_slack = 0;
  Tick election_timeout = 0;
  Tick suspect_timeout = 0;  // liveness lease before reporting a peer
  Tick retransmit_timeout = 0;
  Tick client_timeout = 0;
  Tick sync_timeout = 0;
};

/// Timers derived from the post-GST delivery bound.
TimingParams derive_timing(Tick delta);

struct ScenarioConfig {
  Protocol protocol = Protocol::Raft;
  std::size_t n = 3;
  std::size_t f = 1;
  Tick gst = 0;
  Tick delta = 4;
  AdversaryPolicy adversary;
  WorkloadSpec workload;
  std::uint64_t seed = 1;
  bool confidential = false;

  // Harness knobs.
  bool shielded = true;
  Tick tick_budget = 200'000;
  Tick client_start = 0;
  std::size_t window = 32;
  std::size_t batch = 1;
  std::vector<JoinSpec> joins;
  std::optional<TimingParams> timing;

  TimingParams effective_timing() const { return timing ? *timing : derive_timing(delta); }
};

/// Throws Error(InvalidConfig) describing the first violated constraint.
void validate(const ScenarioConfig& config);
void validate(const WorkloadSpec& spec);

}  // namespace shieldrep
