#pragma once

#include <functional>
#include <optional>

#include "shieldrep/protocols/replica.hpp"

namespace shieldrep::protocols {

/// How a client reaches replicas: a direct, authenticated call path plus the
/// CAS-published membership.
class ClusterView {
 public:
  virtual ~ClusterView() = default;
  /// nullptr if the node is unknown or down.
  virtual Replica* replica(NodeId id) = 0;
  virtual std::vector<NodeId> members() const = 0;
};

struct ClientOp {
  OpType op = OpType::Get;
  Bytes key;
  Bytes value;
};

/// Final fate of one operation. `completed == false` means the client gave
/// up; the op may or may not have taken effect.
struct Outcome {
  bool completed = false;
  bool found = false;
  Bytes value;
  RequestId rid = 0;
  NodeId served_by = kNoNode;
};

using OutcomeFn = std::function<void(const Outcome&)>;

/// Closed-loop client: one outstanding operation, routed per protocol, with
/// leader-hint redirection and a give-up timeout.
class Client {
 public:
  Client(ClientId id, Key key, Protocol protocol, ClusterView& cluster, Tick timeout,
         Tick retry_backoff);

  ClientId id() const { return id_; }
  bool idle() const { return !current_; }
  /// Request id of the outstanding operation, if any.
  std::optional<RequestId> pending_rid() const {
    return current_ ? std::optional<RequestId>(current_->rid) : std::nullopt;
  }

  void issue(ClientOp op, Tick now, OutcomeFn done);
  /// Retries and timeouts.
  void step(Tick now);

  std::uint64_t redirects() const { return redirects_; }

 private:
  struct Pending {
    ClientOp op;
    RequestId rid = 0;
    Tick issued_at = 0;
    Tick retry_at = 0;
    NodeId target = kNoNode;
    OutcomeFn done;
  };

  NodeId route(const ClientOp& op);
  void attempt(Tick now);
  void on_reply(RequestId rid, NodeId from, const Reply& r);
  void finish(Outcome o);

  ClientId id_;
  Key key_;
  Protocol protocol_;
  ClusterView& cluster_;
  Tick timeout_;
  Tick backoff_;
  RequestId next_rid_ = 1;
  std::optional<Pending> current_;
  NodeId leader_hint_ = kNoNode;
  std::size_t home_offset_ = 0;
  std::size_t rr_ = 0;
  Tick now_ = 0;
  std::uint64_t redirects_ = 0;
};

}  // namespace shieldrep::protocols
