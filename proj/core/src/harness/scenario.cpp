#include "shieldrep/harness/scenario.hpp"

#include <algorithm>

#include "shieldrep/core/crypto.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep::harness {

namespace {

Key seeded_key(std::uint64_t seed, std::string_view label) {
  ByteWriter ctx;
  ctx.u64(seed);
  Key root{};
  return crypto::derive_key(root, label, ctx.data());
}

attestation::CodeIdentity tampered_identity() {
  auto id = attestation::genuine_replica_identity();
  id.flags = "patched";
  return id;
}

}  // namespace

Cluster::Cluster(ScenarioConfig config, bool record_wire) : config_(std::move(config)) {
  validate(config_);
  transport::NetConfig nc;
  nc.gst = config_.gst;
  nc.delta = config_.delta;
  nc.seed = config_.seed;
  nc.record_wire = record_wire;
  net_ = std::make_unique<transport::SimNetwork>(nc, config_.adversary);
  net_->set_crash_handler([this](NodeId n) { crash(n); });

  attestation::CasOptions co;
  co.f = config_.f;
  co.client_count = config_.workload.client_count;
  co.confidential = config_.confidential;
  cas_ = std::make_unique<attestation::Cas>(seeded_key(config_.seed, "cas-master"), config_.seed,
                                            co, &trace_);
  cas_->expect(attestation::attest(attestation::genuine_replica_identity()));

  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < config_.n; ++i) {
    auto id = attest_machine(true, true);
    if (!id) throw Error(Errc::InvalidConfig, "genuine machine failed attestation");
    ids.push_back(*id);
  }
  for (const auto& [id, bundle] : cas_->form_cluster(ids)) start_replica(bundle);

  const TimingParams t = config_.effective_timing();
  for (std::uint32_t c = 1; c <= config_.workload.client_count; ++c) {
    clients_.push_back(std::make_unique<protocols::Client>(
        ClientId{c}, cas_->client_key(ClientId{c}), config_.protocol, *this, t.client_timeout,
        t.heartbeat_interval));
  }
}

Cluster::~Cluster() = default;

protocols::ReplicaEnv Cluster::env() const {
  protocols::ReplicaEnv e;
  e.nic = net_.get();
  e.trace = const_cast<Trace*>(&trace_);
  e.cas = cas_.get();
  e.metrics = const_cast<protocols::OpMetrics*>(&metrics_);
  auto& o = e.options;
  o.protocol = config_.protocol;
  o.f = config_.f;
  o.timing = config_.effective_timing();
  o.confidential = config_.confidential;
  o.shielded = config_.shielded;
  o.window = config_.window;
  o.batch = config_.batch;
  o.seed = config_.seed;
  return e;
}

NodeId Cluster::start_replica(const attestation::ProvisionBundle& bundle) {
  auto r = protocols::make_replica(bundle, env());
  protocols::Replica* raw = r.get();
  cas_->register_hooks(bundle.id,
                       attestation::MemberHooks{
                           [raw](const attestation::MembershipUpdate& u) {
                             return raw->on_membership(u);
                           },
                           [raw] { return raw->progress(); }});
  replicas_[bundle.id] = std::move(r);
  if (cas_->is_member(bundle.id)) ever_members_.insert(bundle.id);
  return bundle.id;
}

std::optional<NodeId> Cluster::attest_machine(bool genuine, bool has_hw_key) {
  const std::string machine = "host-" + std::to_string(next_machine_++);
  ByteWriter ctx;
  ctx.u64(config_.seed).str(machine);
  const Key hw = crypto::derive_key(Key{}, "hw-root", ctx.data());
  if (has_hw_key) {
    cas_->register_machine(machine, hw);
  }
  const auto m = attestation::attest(genuine ? attestation::genuine_replica_identity()
                                             : tampered_identity());
  auto session = cas_->begin(machine);
  // Without a hardware root the best an attacker can do is a self-made key.
  const Key signing = has_hw_key ? hw : crypto::derive_key(hw, "forged", {});
  const auto quote = attestation::generate_quote(m, signing, session.ephemeral_key, session.nonce);
  const auto res = cas_->complete(session, quote);
  if (const auto* ok = std::get_if<attestation::Provisioned>(&res)) return ok->id;
  return std::nullopt;
}

protocols::Replica* Cluster::replica(NodeId id) {
  auto it = replicas_.find(id);
  if (it == replicas_.end() || it->second->crashed()) return nullptr;
  return it->second.get();
}

void Cluster::crash(NodeId id) {
  if (auto* r = replica(id)) r->crash();
}

JoinOutcome Cluster::join(NodeId designated, bool genuine, bool has_hw_key) {
  JoinOutcome out;
  out.at = now_;
  auto id = attest_machine(genuine, has_hw_key);
  if (!id) {
    out.reason = "attestation denied";
    joins_.push_back(out);
    return out;
  }
  out.id = *id;
  try {
    auto bundle = cas_->join_cluster(*id, designated);
    start_replica(bundle);
    replicas_[*id]->start_join(designated);
    out.admitted = true;
  } catch (const Error& e) {
    out.reason = e.what();
  }
  joins_.push_back(out);
  return out;
}

void Cluster::tick() {
  trace_.set_now(now_);
  while (next_join_ < config_.joins.size() && config_.joins[next_join_].at <= now_) {
    const JoinSpec& js = config_.joins[next_join_++];
    NodeId designated = js.designated;
    const auto live = live_members();
    if (config_.protocol == Protocol::Chain && !cas_->members().empty()) {
      designated = cas_->members().back();  // a chain grows at its tail
    } else if (std::find(live.begin(), live.end(), designated) == live.end() && !live.empty()) {
      designated = live.front();
    }
    auto out = join(designated, js.genuine, js.has_hw_key);
    if (out.admitted && js.crash_at) crash_plan_.emplace_back(*js.crash_at, out.id);
  }
  for (auto it = crash_plan_.begin(); it != crash_plan_.end();) {
    if (it->first <= now_) {
      crash(it->second);
      it = crash_plan_.erase(it);
    } else {
      ++it;
    }
  }
  net_->advance(now_);
  for (auto& c : clients_) c->step(now_);
  for (auto& [id, r] : replicas_) r->step(now_);
  for (auto& [id, r] : replicas_) {
    if (!r->crashed() && r->holds_leader_lease(now_)) {
      leases_.push_back(tracecheck::LeaseSample{now_, id, r->protocol_view()});
    }
  }
  ++now_;
}

bool Cluster::run_until(const std::function<bool()>& done, Tick max_ticks) {
  const Tick end = now_ + max_ticks;
  while (!done() && now_ < end) tick();
  return done();
}

void Cluster::issue(std::size_t i, const protocols::ClientOp& op,
                    std::function<void(const protocols::Outcome&)> done) {
  tracecheck::HistoryOp h;
  h.client = clients_[i]->id();
  h.op = op.op;
  h.key = op.key;
  if (op.op == OpType::Put) h.value = op.value;
  h.invoke = clock_++;
  const std::size_t idx = history_.size();
  history_.push_back(std::move(h));
  open_op_[i] = idx;
  clients_[i]->issue(op, now_, [this, i, idx, done = std::move(done)](const protocols::Outcome& o) {
    auto& rec = history_[idx];
    rec.response = clock_++;
    rec.completed = o.completed;
    rec.rid = o.rid;
    if (rec.op == OpType::Get) {
      rec.found = o.found;
      rec.value = o.value;
    }
    open_op_.erase(i);
    if (done) done(o);
  });
  if (auto rid = clients_[i]->pending_rid()) history_[idx].rid = *rid;
}

std::optional<protocols::Outcome> Cluster::run_op(std::size_t i, const protocols::ClientOp& op,
                                                  Tick max_ticks) {
  std::optional<protocols::Outcome> out;
  issue(i, op, [&out](const protocols::Outcome& o) { out = o; });
  run_until([&] { return out.has_value(); }, max_ticks);
  return out;
}

std::vector<tracecheck::HistoryOp> Cluster::history() const {
  std::map<std::pair<ClientId, RequestId>, std::uint64_t> commits;
  for (const auto& e : trace_.events()) {
    if (e.kind == EventKind::Commit) commits.try_emplace({e.client, e.rid}, e.cnt);
  }
  auto out = history_;
  for (auto& h : out) {
    if (h.op != OpType::Put) continue;
    auto it = commits.find({h.client, h.rid});
    if (it != commits.end()) h.commit_index = it->second;
  }
  return out;
}

std::vector<NodeId> Cluster::live_members() const {
  std::vector<NodeId> out;
  for (NodeId m : cas_->members()) {
    auto it = replicas_.find(m);
    if (it != replicas_.end() && !it->second->crashed()) out.push_back(m);
  }
  return out;
}

std::set<NodeId> Cluster::faulty() const {
  std::set<NodeId> out;
  for (const auto& [id, r] : replicas_) {
    if (r->crashed()) out.insert(id);
  }
  for (NodeId m : ever_members_) {
    if (!cas_->is_member(m)) out.insert(m);
  }
  return out;
}

SimulationResult simulate(const ScenarioConfig& config, const std::vector<Operation>& ops,
                          bool record_wire) {
  Cluster c(config, record_wire);
  const std::size_t nc = c.client_count();
  std::vector<std::vector<std::size_t>> queue(nc);
  for (std::size_t i = ops.size(); i-- > 0;) queue[ops[i].client % nc].push_back(i);

  SimulationResult res;
  auto all_done = [&] {
    for (std::size_t i = 0; i < nc; ++i) {
      if (!queue[i].empty() || !c.client(i).idle()) return false;
    }
    return true;
  };
  while (c.now() < config.tick_budget) {
    if (c.now() >= config.client_start) {
      for (std::size_t i = 0; i < nc; ++i) {
        if (queue[i].empty() || !c.client(i).idle()) continue;
        const Operation& op = ops[queue[i].back()];
        queue[i].pop_back();
        c.issue(i, protocols::ClientOp{op.op, op.key, op.value});
      }
    }
    if (all_done()) break;
    c.tick();
  }
  res.budget_exhausted = !all_done();
  // Let followers, chain tails and shadows catch up before inspection.
  const Tick settle = 40 * config.delta;
  for (Tick t = 0; t < settle && c.now() < config.tick_budget + settle; ++t) c.tick();

  res.config = config;
  res.history = c.history();
  res.trace = c.trace().events();
  res.metrics = c.metrics();
  res.leases = c.lease_samples();
  res.net = c.network().stats();
  res.adversary = c.network().adversary().stats();
  res.frames = res.net.frames;
  res.wire_bytes = res.net.bytes;
  if (record_wire) res.wire = c.network().wire_log();
  res.op_count = ops.size();
  for (const auto& h : res.history) {
    if (h.completed) ++res.completed;
  }
  res.ticks = c.now();
  res.faulty = c.faulty();
  res.members = c.members();
  res.joins = c.joins();
  for (const auto& [id, r] : c.replicas()) {
    if (r->crashed()) continue;
    res.messages += r->endpoint().stats().messages_sent;
    if (c.cas().is_member(id)) res.stores[id] = r->store().export_snapshot();
    if (record_wire) {
      auto a = r->store().arena();
      res.arenas.emplace_back(a.begin(), a.end());
    }
  }
  for (const Key& k : c.cas().released_keys()) res.released_keys.emplace_back(k.begin(), k.end());
  return res;
}

AdversaryPolicy preset_adversary(std::string_view name) {
  AdversaryPolicy p;
  p.name = std::string(name);
  if (name == "identity") return p;
  if (name == "drop") {
    p.defaults.drop_prob = 0.2;
  } else if (name == "reorder") {
    p.defaults.reorder_window = 8;
  } else if (name == "replay") {
    p.defaults.replay_prob = 1.0;
  } else if (name == "tamper") {
    p.defaults.tamper_prob = 0.1;
  } else if (name == "dup") {
    p.defaults.dup_prob = 0.2;
  } else if (name == "leader-partition") {
    // Node 0 leads (R-Raft) or heads the chain (R-CR) initially.
    p.scripted.push_back(ScriptedAction{30, ActionType::Partition, {NodeId{0}}});
    p.scripted.push_back(ScriptedAction{250, ActionType::Heal});
  } else {
    throw Error(Errc::InvalidConfig, "unknown adversary preset: " + std::string(name));
  }
  return p;
}

}  // namespace shieldrep::harness
