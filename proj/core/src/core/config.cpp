#include "shieldrep/core/config.hpp"

#include <algorithm>
#include <cctype>

#include "shieldrep/core/error.hpp"
#include "shieldrep/core/quorum.hpp"

namespace shieldrep {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::Abd: return "r-abd";
    case Protocol::Raft: return "r-raft";
    case Protocol::Chain: return "r-cr";
    case Protocol::AllConcur: return "r-allconcur";
  }
  return "?";
}

std::optional<Protocol> protocol_from_string(std::string_view s) {
  auto l = lower(s);
  for (auto p : {Protocol::Abd, Protocol::Raft, Protocol::Chain, Protocol::AllConcur}) {
    if (to_string(p) == l) return p;
  }
  return std::nullopt;
}

std::string_view to_string(ActionType a) {
  switch (a) {
    case ActionType::Partition: return "Partition";
    case ActionType::Heal: return "Heal";
    case ActionType::ReplayCaptured: return "ReplayCaptured";
    case ActionType::TamperNext: return "TamperNext";
    case ActionType::DelayAll: return "DelayAll";
    case ActionType::CrashTee: return "CrashTee";
  }
  return "?";
}

std::optional<ActionType> action_from_string(std::string_view s) {
  for (auto a : {ActionType::Partition, ActionType::Heal, ActionType::ReplayCaptured,
                 ActionType::TamperNext, ActionType::DelayAll, ActionType::CrashTee}) {
    if (lower(to_string(a)) == lower(s)) return a;
  }
  return std::nullopt;
}

const ChannelFaults& AdversaryPolicy::faults_for(const ChannelId& cq) const {
  auto it = per_channel.find(cq);
  return it == per_channel.end() ? defaults : it->second;
}

TimingParams derive_timing(Tick delta) {
  TimingParams t;
  t.heartbeat_interval = 2 * delta;
  t.lease_duration = 8 * delta;
  t.lease_slack = delta;
  // Must exceed lease_duration + lease_slack so a follower never campaigns
  // while it still honors a lease it granted.
  t.election_timeout = 12 * delta;
  t.suspect_timeout = 20 * delta;
  t.retransmit_timeout = 4 * delta + 2;
  t.client_timeout = 80 * delta;
  t.sync_timeout = 40 * delta;
  return t;
}

void validate(const WorkloadSpec& spec) {
  if (spec.key_count == 0) throw Error(Errc::InvalidConfig, "key_count must be > 0");
  if (spec.value_size == 0) throw Error(Errc::InvalidConfig, "value_size must be > 0");
  if (spec.client_count == 0) throw Error(Errc::InvalidConfig, "client_count must be > 0");
  if (!(spec.read_ratio >= 0.0 && spec.read_ratio <= 1.0)) {
    throw Error(Errc::InvalidConfig, "read_ratio must be in [0,1]");
  }
  if (spec.distribution == KeyDistribution::Zipfian &&
      !(spec.zipf_theta > 0.0 && spec.zipf_theta != 1.0)) {
    throw Error(Errc::InvalidConfig, "zipf theta must be > 0 and != 1");
  }
}

void validate(const ScenarioConfig& config) {
  quorum_size(config.n, config.f);
  if (config.delta < 1) throw Error(Errc::InvalidConfig, "delta must be >= 1");
  if (config.window < 1) throw Error(Errc::InvalidConfig, "window must be >= 1");
  if (config.batch < 1) throw Error(Errc::InvalidConfig, "batch must be >= 1");
  validate(config.workload);
  auto check_prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(Errc::InvalidConfig, std::string(what) + " must be in [0,1]");
    }
  };
  auto check_faults = [&](const ChannelFaults& f) {
    check_prob(f.drop_prob, "drop_prob");
    check_prob(f.dup_prob, "dup_prob");
    check_prob(f.tamper_prob, "tamper_prob");
    check_prob(f.replay_prob, "replay_prob");
  };
  check_faults(config.adversary.defaults);
  for (const auto& [cq, f] : config.adversary.per_channel) check_faults(f);
}

}  // namespace shieldrep
