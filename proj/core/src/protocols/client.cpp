#include "shieldrep/protocols/client.hpp"

#include <algorithm>

namespace shieldrep::protocols {

Client::Client(ClientId id, Key key, Protocol protocol, ClusterView& cluster, Tick timeout,
               Tick retry_backoff)
    : id_(id),
      key_(key),
      protocol_(protocol),
      cluster_(cluster),
      timeout_(timeout),
      backoff_(std::max<Tick>(retry_backoff, 1)) {}

NodeId Client::route(const ClientOp& op) {
  auto members = cluster_.members();
  if (members.empty()) return kNoNode;
  switch (protocol_) {
    case Protocol::Raft:
      if (leader_hint_ != kNoNode &&
          std::find(members.begin(), members.end(), leader_hint_) != members.end()) {
        return leader_hint_;
      }
      return members[rr_++ % members.size()];
    case Protocol::Chain:
      return op.op == OpType::Put ? members.front() : members.back();
    case Protocol::Abd:
    case Protocol::AllConcur:
      return members[(id_.value + home_offset_) % members.size()];
  }
  return members.front();
}

void Client::issue(ClientOp op, Tick now, OutcomeFn done) {
  now_ = now;
  Pending p;
  p.op = std::move(op);
  p.rid = next_rid_++;
  p.issued_at = now;
  p.retry_at = now;
  p.done = std::move(done);
  current_ = std::move(p);
  attempt(now);
}

void Client::attempt(Tick now) {
  if (!current_) return;
  Pending& p = *current_;
  p.target = route(p.op);
  p.retry_at = now + timeout_;  // no automatic resend once a replica took it
  Replica* r = cluster_.replica(p.target);
  if (!r) {
    p.retry_at = now + backoff_;
    if (leader_hint_ == p.target) leader_hint_ = kNoNode;
    ++rr_;
    ++home_offset_;
    return;
  }
  ClientRequest req;
  req.client = id_;
  req.request_id = p.rid;
  req.op = p.op.op;
  req.key = p.op.key;
  req.value = p.op.value;
  req.known_view = 0;
  if (leader_hint_ != kNoNode) req.known_leader = leader_hint_;
  const RequestId rid = p.rid;
  const NodeId target = p.target;
  r->submit(sign_request(req, key_),
            [this, rid, target](const Reply& reply) { on_reply(rid, target, reply); });
}

void Client::on_reply(RequestId rid, NodeId from, const Reply& r) {
  if (!current_ || current_->rid != rid) return;  // a reply for an abandoned op
  switch (r.status) {
    case ReplyStatus::Ok: {
      Outcome o;
      o.completed = true;
      o.found = r.found;
      o.value = r.value;
      o.rid = rid;
      o.served_by = from;
      if (protocol_ == Protocol::Raft) leader_hint_ = from;
      finish(std::move(o));
      return;
    }
    case ReplyStatus::NotLeader:
    case ReplyStatus::NotTail:
    case ReplyStatus::Refused:
      ++redirects_;
      leader_hint_ = r.leader_hint;
      if (r.leader_hint == kNoNode) ++rr_;
      current_->retry_at = now_ + backoff_;
      return;
    case ReplyStatus::Duplicate:
    case ReplyStatus::BadAuth:
      finish(Outcome{false, false, {}, rid, from});
      return;
  }
}

void Client::finish(Outcome o) {
  OutcomeFn done = std::move(current_->done);
  current_.reset();
  done(o);
}

void Client::step(Tick now) {
  now_ = now;
  if (!current_) return;
  if (now >= current_->issued_at + timeout_) {
    // Give up: the op stays pending in the history.
    ++home_offset_;
    leader_hint_ = kNoNode;
    ++rr_;
    finish(Outcome{false, false, {}, current_->rid, current_->target});
    return;
  }
  if (now >= current_->retry_at) attempt(now);
}

}  // namespace shieldrep::protocols
