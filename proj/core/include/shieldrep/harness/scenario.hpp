#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>

#include "shieldrep/attestation/cas.hpp"
#include "shieldrep/core/config.hpp"
#include "shieldrep/core/trace.hpp"
#include "shieldrep/harness/workload.hpp"
#include "shieldrep/protocols/client.hpp"
#include "shieldrep/protocols/replica.hpp"
#include "shieldrep/tracecheck/history.hpp"
#include "shieldrep/tracecheck/properties.hpp"
#include "shieldrep/transport/sim_network.hpp"

namespace shieldrep::harness {

struct JoinOutcome {
  Tick at = 0;
  NodeId id = kNoNode;
  bool admitted = false;
  std::string reason;
};

/// A simulated deployment: CAS, attested replicas, clients and the network,
/// driven one tick at a time. Everything is deterministic in the seed.
class Cluster final : public protocols::ClusterView {
 public:
  explicit Cluster(ScenarioConfig config, bool record_wire = false);
  ~Cluster() override;

  const ScenarioConfig& config() const { return config_; }
  Tick now() const { return now_; }

  /// One tick: scheduled joins/crashes, network delivery, clients, replicas.
  void tick();
  /// Ticks until `done()` holds or `max_ticks` elapse; returns done().
  bool run_until(const std::function<bool()>& done, Tick max_ticks);

  protocols::Replica* replica(NodeId id) override;
  std::vector<NodeId> members() const override { return cas_->members(); }
  /// Every replica ever started, crashed ones included.
  const std::map<NodeId, std::unique_ptr<protocols::Replica>>& replicas() const {
    return replicas_;
  }

  void crash(NodeId id);
  /// Attests a fresh machine and joins it as a shadow of `designated`.
  JoinOutcome join(NodeId designated, bool genuine = true, bool has_hw_key = true);

  std::size_t client_count() const { return clients_.size(); }
  protocols::Client& client(std::size_t i) { return *clients_[i]; }
  /// Issues through client `i` and records the op in the history.
  void issue(std::size_t i, const protocols::ClientOp& op,
             std::function<void(const protocols::Outcome&)> done = {});
  /// Issues and ticks until the op finishes or `max_ticks` pass.
  std::optional<protocols::Outcome> run_op(std::size_t i, const protocols::ClientOp& op,
                                           Tick max_ticks);

  Trace& trace() { return trace_; }
  transport::SimNetwork& network() { return *net_; }
  attestation::Cas& cas() { return *cas_; }
  protocols::OpMetrics& metrics() { return metrics_; }
  const std::vector<tracecheck::LeaseSample>& lease_samples() const { return leases_; }
  const std::vector<JoinOutcome>& joins() const { return joins_; }

  /// Client history with commit indices filled from the trace.
  std::vector<tracecheck::HistoryOp> history() const;
  /// Crashed nodes plus members that were excised.
  std::set<NodeId> faulty() const;
  std::vector<NodeId> live_members() const;

 private:
  protocols::ReplicaEnv env() const;
  NodeId start_replica(const attestation::ProvisionBundle& bundle);
  std::optional<NodeId> attest_machine(bool genuine, bool has_hw_key);

  ScenarioConfig config_;
  Trace trace_;
  std::unique_ptr<transport::SimNetwork> net_;
  std::unique_ptr<attestation::Cas> cas_;
  std::map<NodeId, std::unique_ptr<protocols::Replica>> replicas_;
  std::set<NodeId> ever_members_;
  std::vector<std::unique_ptr<protocols::Client>> clients_;
  protocols::OpMetrics metrics_;
  std::vector<tracecheck::HistoryOp> history_;
  std::map<std::size_t, std::size_t> open_op_;  // client -> history index
  std::uint64_t clock_ = 0;
  std::vector<tracecheck::LeaseSample> leases_;
  std::vector<JoinOutcome> joins_;
  std::size_t next_machine_ = 0;
  std::size_t next_join_ = 0;
  std::vector<std::pair<Tick, NodeId>> crash_plan_;
  Tick now_ = 0;
};

struct SimulationResult {
  ScenarioConfig config;
  std::vector<TraceEvent> trace;
  std::vector<tracecheck::HistoryOp> history;
  protocols::OpMetrics metrics;
  std::vector<tracecheck::LeaseSample> leases;
  std::vector<transport::WireRecord> wire;
  std::vector<Bytes> arenas;         // untrusted store bytes of live replicas (record_wire)
  std::vector<Bytes> released_keys;  // every key the CAS provisioned
  transport::NetStats net;
  transport::AdversaryStats adversary;
  std::uint64_t messages = 0;
  std::uint64_t frames = 0;
  std::uint64_t wire_bytes = 0;
  std::size_t op_count = 0;
  std::size_t completed = 0;
  Tick ticks = 0;
  bool budget_exhausted = false;
  std::set<NodeId> faulty;
  std::vector<NodeId> members;
  std::vector<JoinOutcome> joins;
  std::map<NodeId, std::vector<kvstore::SnapshotRecord>> stores;
};

/// Runs `ops` closed-loop (one outstanding op per client), then lets the
/// replicas settle. Throws Error(InvalidConfig) for a bad config.
SimulationResult simulate(const ScenarioConfig& config, const std::vector<Operation>& ops,
                          bool record_wire = false);

/// Named adversary presets: identity, drop, reorder, replay, tamper, dup,
/// leader-partition. Throws Error(InvalidConfig) for an unknown name.
AdversaryPolicy preset_adversary(std::string_view name);

}  // namespace shieldrep::harness
