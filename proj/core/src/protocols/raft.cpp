#include "shieldrep/protocols/raft.hpp"

#include <algorithm>

#include "shieldrep/core/error.hpp"

namespace shieldrep::protocols {

namespace {

constexpr std::size_t kMaxEntriesPerAppend = 64;

void write_entry(ByteWriter& w, const RaftReplica::Entry& e) {
  w.u64(e.term).u8(e.noop ? 1 : 0).u32(e.client.value).u64(e.rid).bytes(e.key).bytes(e.value);
}

RaftReplica::Entry read_entry(ByteReader& r) {
  RaftReplica::Entry e;
  e.term = r.u64();
  e.noop = r.u8() != 0;
  e.client = ClientId{r.u32()};
  e.rid = r.u64();
  e.key = r.bytes();
  e.value = r.bytes();
  return e;
}

}  // namespace

RaftReplica::RaftReplica(const attestation::ProvisionBundle& bundle, ReplicaEnv env)
    : Replica(bundle, std::move(env)) {
  handle(kRaftRequestVote, [this](const transport::Inbound& in) { on_request_vote(in); });
  handle(kRaftVote, [this](const transport::Inbound& in) { on_vote(in); });
  handle(kRaftAppend, [this](const transport::Inbound& in) { on_append(in); });
  handle(kRaftAppendAck, [this](const transport::Inbound& in) { on_append_ack(in); });
  handle(kRaftCommit, [this](const transport::Inbound& in) { on_commit(in); });
  handle(kRaftCommitAck, [this](const transport::Inbound& in) { on_commit_ack(in); });

  if (!members_.empty()) {
    // Bootstrap: the lowest id leads term 1 without an election.
    leader_ = *std::min_element(members_.begin(), members_.end());
    report_view(term_);
    if (leader_ == id_) {
      role_ = Role::Leader;
      for (NodeId p : peers()) {
        next_index_[p] = 1;
        match_index_[p] = 0;
        applied_at_[p] = 0;
      }
    }
  }
  reset_election_timer();
}

bool RaftReplica::holds_leader_lease(Tick now) const {
  if (role_ != Role::Leader) return false;
  std::size_t valid = 1;
  for (NodeId p : peers()) {
    auto it = held_leases_.find(p);
    if (it != held_leases_.end() && tcb::lease_valid(it->second, now, /*as_granter=*/false)) {
      ++valid;
    }
  }
  return valid >= quorum();
}

void RaftReplica::report_view(ViewId term) {
  if (term <= reported_view_) return;
  reported_view_ = term;
  if (trace()) trace()->view_change(id_, term);
}

void RaftReplica::stale(const transport::Inbound& in) {
  if (trace()) trace()->reject(id_, "StaleTerm", in.tuple.cq, in.tuple.cnt, in.digest);
}

void RaftReplica::reset_election_timer() {
  const Tick base = timing().election_timeout;
  std::uniform_int_distribution<Tick> d(base, 2 * base);
  election_deadline_ = now() + d(rng());
}

void RaftReplica::become_follower(ViewId term) {
  const bool was_leader = role_ == Role::Leader;
  if (term > term_) {
    term_ = term;
    voted_for_ = kNoNode;
    leader_ = kNoNode;
    match_known_ = std::min(match_known_, applied_);
  }
  role_ = Role::Follower;
  votes_.clear();
  if (was_leader) {
    held_leases_.clear();
    fail_pending(ReplyStatus::NotLeader);
  }
}

void RaftReplica::fail_pending(ReplyStatus status) {
  auto writes = std::move(pending_writes_);
  pending_writes_.clear();
  auto reads = std::move(pending_reads_);
  pending_reads_.clear();
  Reply r{status};
  r.leader_hint = leader_;
  for (auto& [idx, w] : writes) w.first(r);
  for (auto& pr : reads) pr.reply(r);
}

void RaftReplica::start_election() {
  ++term_;
  role_ = Role::Candidate;
  voted_for_ = id_;
  leader_ = kNoNode;
  votes_ = {id_};
  match_known_ = std::min(match_known_, applied_);
  reset_election_timer();
  if (votes_.size() >= quorum()) {
    become_leader();
    return;
  }
  ByteWriter w;
  w.u64(term_).u64(log_.size()).u64(last_log_term());
  broadcast(kRaftRequestVote, w.data());
}

void RaftReplica::become_leader() {
  role_ = Role::Leader;
  leader_ = id_;
  votes_.clear();
  held_leases_.clear();
  next_index_.clear();
  match_index_.clear();
  applied_at_.clear();
  for (NodeId p : peers()) {
    next_index_[p] = log_.size() + 1;
    match_index_[p] = 0;
    applied_at_[p] = 0;
  }
  log_.push_back(Entry{term_, true, {}, 0, {}, {}});
  noop_index_ = log_.size();
  commit_index_ = std::max(commit_index_, applied_);
  shipped_ = std::max(shipped_, applied_);
  commit_announced_ = std::max(commit_announced_, commit_index_);
  report_view(term_);
  replicate(/*heartbeat=*/true);
  advance_commit();
}

void RaftReplica::on_request(const ClientRequest& req, ReplyFn reply) {
  if (role_ != Role::Leader) {
    Reply r{ReplyStatus::NotLeader};
    r.leader_hint = leader_;
    reply(r);
    return;
  }
  if (core().dedupe_client(req.client, req.request_id) == tcb::DedupeResult::Duplicate) {
    reply(Reply{ReplyStatus::Duplicate});
    return;
  }
  if (req.op == OpType::Get) {
    pending_reads_.push_back(PendingRead{req, std::move(reply)});
    serve_reads();
    return;
  }
  log_.push_back(Entry{term_, false, req.client, req.request_id, req.key, req.value});
  pending_writes_[log_.size()] = {std::move(reply), OpKey{req.client, req.request_id}};
  advance_commit();
}

void RaftReplica::serve_reads() {
  if (role_ != Role::Leader || pending_reads_.empty()) return;
  if (applied_ < noop_index_ || !holds_leader_lease(now())) return;
  auto reads = std::move(pending_reads_);
  pending_reads_.clear();
  for (auto& pr : reads) pr.reply(read_local(pr.req.key));
}

void RaftReplica::on_tick() {
  if (status() != tcb::Status::Normal || joining()) return;
  if (role_ == Role::Leader) {
    replicate(now() >= next_heartbeat_);
    serve_reads();
    return;
  }
  if (now() >= election_deadline_) {
    if (core().lease_conflicts(id_, now())) {
      election_deadline_ = now() + timing().heartbeat_interval;
      return;
    }
    start_election();
  }
}

void RaftReplica::replicate(bool heartbeat) {
  const std::uint64_t last = log_.size();
  bool any = false;
  for (NodeId p : peers()) {
    const bool has_new = next_index_[p] <= last;
    if (has_new || heartbeat) {
      send_append(p, heartbeat);
      any = true;
    }
  }
  // One replication round per entry, counted when it first ships.
  for (std::uint64_t i = shipped_ + 1; i <= last; ++i) {
    const Entry& e = log_[i - 1];
    if (!e.noop && e.term == term_) count_round(OpKey{e.client, e.rid});
  }
  shipped_ = last;
  if (any || heartbeat) next_heartbeat_ = now() + timing().heartbeat_interval;
}

void RaftReplica::send_append(NodeId peer, bool force) {
  auto& next = next_index_[peer];
  if (next == 0) next = 1;
  const std::uint64_t last = log_.size();
  const std::uint64_t prev = next - 1;
  const std::uint64_t upto = std::min<std::uint64_t>(last, prev + kMaxEntriesPerAppend);
  if (upto <= prev && !force) return;
  ByteWriter w;
  w.u64(term_).u64(prev).u64(prev == 0 ? 0 : log_[prev - 1].term).u64(commit_index_).u64(now());
  w.u32(static_cast<std::uint32_t>(upto - prev));
  for (std::uint64_t i = prev + 1; i <= upto; ++i) write_entry(w, log_[i - 1]);
  send(peer, kRaftAppend, std::move(w).take());
  next = upto + 1;  // pipelined; a failed ack rewinds it
}

void RaftReplica::on_request_vote(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const ViewId t = r.u64();
  const std::uint64_t last_index = r.u64();
  const ViewId last_term = r.u64();
  auto answer = [&](bool granted) {
    ByteWriter w;
    w.u64(term_).u8(granted ? 1 : 0);
    send(in.from, kRaftVote, std::move(w).take());
  };
  if (t < term_) {
    stale(in);
    answer(false);
    return;
  }
  // A live leadership lease pins this node to the current leader.
  if (core().lease_conflicts(in.from, now())) {
    answer(false);
    return;
  }
  if (t > term_) become_follower(t);
  const bool up_to_date = last_term > last_log_term() ||
                          (last_term == last_log_term() && last_index >= log_.size());
  const bool granted = (voted_for_ == kNoNode || voted_for_ == in.from) && up_to_date;
  if (granted) {
    voted_for_ = in.from;
    reset_election_timer();
  }
  answer(granted);
}

void RaftReplica::on_vote(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const ViewId t = r.u64();
  const bool granted = r.u8() != 0;
  if (t > term_) {
    become_follower(t);
    reset_election_timer();
    return;
  }
  if (t < term_) {
    stale(in);
    return;
  }
  if (role_ != Role::Candidate || !granted) return;
  votes_.insert(in.from);
  if (votes_.size() >= quorum()) become_leader();
}

void RaftReplica::on_append(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const ViewId t = r.u64();
  const std::uint64_t prev = r.u64();
  const ViewId prev_term = r.u64();
  const std::uint64_t leader_commit = r.u64();
  const Tick sent_at = r.u64();
  const std::uint32_t n = r.u32();
  std::vector<Entry> entries;
  entries.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) entries.push_back(read_entry(r));

  if (t < term_) {
    stale(in);
    ByteWriter w;
    w.u64(term_).u8(0).u64(log_.size()).u64(prev).u64(sent_at).u8(0);
    send(in.from, kRaftAppendAck, std::move(w).take());
    return;
  }
  if (t > term_ || role_ != Role::Follower) become_follower(t);
  leader_ = in.from;
  report_view(term_);
  reset_election_timer();

  bool lease_granted = false;
  try {
    core().grant_lease(in.from, now(), timing().lease_duration);
    lease_granted = true;
  } catch (const Error&) {
  }

  bool ok = prev <= log_.size() && (prev == 0 || log_[prev - 1].term == prev_term);
  std::uint64_t match = 0;
  if (ok) {
    std::uint64_t idx = prev;
    for (auto& e : entries) {
      ++idx;
      if (idx <= log_.size()) {
        if (log_[idx - 1].term == e.term) continue;
        if (idx <= applied_) {
          // Would overwrite an applied entry: refuse rather than diverge.
          ok = false;
          break;
        }
        log_.resize(idx - 1);
      }
      log_.push_back(std::move(e));
    }
    match = ok ? prev + n : 0;
    if (ok) match_known_ = std::max(match_known_, match);
  }
  const std::uint64_t applied_before = applied_;
  if (ok) {
    known_commit_ = std::max(known_commit_, leader_commit);
    follower_apply();
  }
  if (applied_ > applied_before) {
    ByteWriter a;
    a.u64(term_).u64(applied_);
    send(in.from, kRaftCommitAck, std::move(a).take());
  }
  ByteWriter w;
  const std::uint64_t hint = ok ? match : std::min<std::uint64_t>(log_.size(), prev);
  w.u64(term_).u8(ok ? 1 : 0).u64(hint).u64(prev).u64(sent_at).u8(lease_granted ? 1 : 0);
  send(in.from, kRaftAppendAck, std::move(w).take());
}

void RaftReplica::on_append_ack(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const ViewId t = r.u64();
  const bool ok = r.u8() != 0;
  const std::uint64_t hint = r.u64();
  const std::uint64_t prev = r.u64();
  const Tick sent_at = r.u64();
  const bool lease_granted = r.u8() != 0;
  if (t > term_) {
    become_follower(t);
    reset_election_timer();
    return;
  }
  if (t < term_) {
    stale(in);
    return;
  }
  if (role_ != Role::Leader || !next_index_.contains(in.from)) return;
  if (lease_granted) {
    auto& l = held_leases_[in.from];
    if (sent_at >= l.granted_at) l = tcb::Lease{id_, sent_at, timing().lease_duration, 0};
  }
  if (ok) {
    auto& m = match_index_[in.from];
    m = std::max(m, hint);
    auto& next = next_index_[in.from];
    next = std::max(next, m + 1);
    advance_commit();
  } else {
    auto& next = next_index_[in.from];
    const std::uint64_t rewind = std::max<std::uint64_t>(1, std::min(hint + 1, prev));
    if (rewind < next) next = rewind;
    send_append(in.from, false);
  }
  serve_reads();
}

void RaftReplica::advance_commit() {
  if (role_ != Role::Leader) return;
  std::uint64_t n = commit_index_;
  for (std::uint64_t i = log_.size(); i > commit_index_; --i) {
    if (log_[i - 1].term != term_) break;
    std::size_t count = 1;
    for (const auto& [p, m] : match_index_) {
      if (m >= i) ++count;
    }
    if (count >= quorum()) {
      n = i;
      break;
    }
  }
  if (n > commit_index_) commit_index_ = n;
  if (commit_index_ > commit_announced_) {
    for (std::uint64_t i = commit_announced_ + 1; i <= commit_index_; ++i) {
      const Entry& e = log_[i - 1];
      if (!e.noop && pending_writes_.contains(i)) count_round(OpKey{e.client, e.rid});
    }
    commit_announced_ = commit_index_;
    ByteWriter w;
    w.u64(term_).u64(commit_index_);
    broadcast(kRaftCommit, w.data());
  }
  leader_apply();
}

void RaftReplica::on_commit(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const ViewId t = r.u64();
  const std::uint64_t c = r.u64();
  if (t < term_) {
    stale(in);
    return;
  }
  if (t > term_ || role_ != Role::Follower) become_follower(t);
  leader_ = in.from;
  known_commit_ = std::max(known_commit_, c);
  follower_apply();
  ByteWriter w;
  w.u64(term_).u64(applied_);
  send(in.from, kRaftCommitAck, std::move(w).take());
}

void RaftReplica::on_commit_ack(const transport::Inbound& in) {
  ByteReader r(in.payload);
  const ViewId t = r.u64();
  const std::uint64_t applied = r.u64();
  if (t > term_) {
    become_follower(t);
    reset_election_timer();
    return;
  }
  if (t < term_ || role_ != Role::Leader || !applied_at_.contains(in.from)) return;
  auto& a = applied_at_[in.from];
  a = std::max(a, applied);
  leader_apply();
}

void RaftReplica::follower_apply() {
  const std::uint64_t target = std::min({known_commit_, match_known_, log_.size()});
  while (applied_ < target) apply_entry(applied_ + 1);
}

void RaftReplica::leader_apply() {
  if (role_ != Role::Leader) return;
  while (applied_ < commit_index_) {
    const std::uint64_t i = applied_ + 1;
    std::size_t count = 1;
    for (const auto& [p, a] : applied_at_) {
      if (a >= i) ++count;
    }
    if (count < quorum()) break;
    apply_entry(i);
    auto it = pending_writes_.find(i);
    if (it != pending_writes_.end()) {
      auto fn = std::move(it->second.first);
      pending_writes_.erase(it);
      fn(Reply{ReplyStatus::Ok, true, {}});
    }
  }
  serve_reads();
}

void RaftReplica::apply_entry(std::uint64_t index) {
  const Entry& e = log_[index - 1];
  applied_ = index;
  if (!e.noop) {
    core().dedupe_client(e.client, e.rid);
    apply_write(e.key, e.value, kvstore::Version{index, NodeId{0}}, index, e.client, e.rid,
                e.term);
  }
  ByteWriter w;
  w.u64(index);
  write_entry(w, e);
  publish_delta(w.data());
}

void RaftReplica::on_members_changed(const attestation::MembershipUpdate& u) {
  using attestation::UpdateKind;
  if (u.kind == UpdateKind::Promoted) {
    if (u.subject == id_) {
      reset_election_timer();
      return;
    }
    drop_subscriber(u.subject);
    if (role_ == Role::Leader) {
      next_index_[u.subject] = log_.size() + 1;
      match_index_[u.subject] = 0;
      applied_at_[u.subject] = 0;
      send_append(u.subject, true);
    }
  } else if (u.kind == UpdateKind::Removed) {
    next_index_.erase(u.subject);
    match_index_.erase(u.subject);
    applied_at_.erase(u.subject);
    held_leases_.erase(u.subject);
    if (leader_ == u.subject) leader_ = kNoNode;
    advance_commit();
  }
}

void RaftReplica::write_sync_state(ByteWriter& w) const {
  w.u64(term_).u64(applied_);
  for (std::uint64_t i = 1; i <= applied_; ++i) write_entry(w, log_[i - 1]);
}

void RaftReplica::read_sync_state(ByteReader& r) {
  term_ = r.u64();
  const std::uint64_t n = r.u64();
  log_.clear();
  for (std::uint64_t i = 0; i < n; ++i) log_.push_back(read_entry(r));
  applied_ = known_commit_ = match_known_ = commit_index_ = n;
  for (const auto& e : log_) {
    if (!e.noop) core().dedupe_client(e.client, e.rid);
  }
  role_ = Role::Follower;
  leader_ = kNoNode;
  voted_for_ = kNoNode;
  report_view(term_);
}

void RaftReplica::on_sync_delta(ByteReader& r) {
  const std::uint64_t index = r.u64();
  Entry e = read_entry(r);
  if (index <= applied_) return;
  if (index == log_.size() + 1) {
    log_.push_back(std::move(e));
  } else if (index > log_.size()) {
    return;
  }
  // Committed entries are identical in every log; treat as matching.
  known_commit_ = std::max(known_commit_, index);
  match_known_ = std::max(match_known_, index);
  follower_apply();
}

}  // namespace shieldrep::protocols
