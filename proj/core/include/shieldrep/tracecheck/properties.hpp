#pragma once

#include <set>
#include <string>
#include <vector>

#include "shieldrep/core/trace.hpp"

namespace shieldrep::tracecheck {

enum class Property { Origin, Order, NoDup, Agreement, Linearizability, SecretLeak, LeaseExclusion };

std::string_view to_string(Property p);

/// A property violation plus the smallest event subsequence that, fed back
/// to the same checker alone, reproduces it.
struct Violation {
  Property property = Property::Origin;
  std::string detail;
  std::vector<TraceEvent> witness;
};

/// Throws Error(MalformedTrace) if events are out of (at, seq) order or a
/// Send/Accept lacks its channel or digest.
void validate(const std::vector<TraceEvent>& trace);

/// Every Accept at a trusted receiver matches a Send of the same message by
/// a sender that was trusted before sending, and the Send precedes it.
std::vector<Violation> check_origin(const std::vector<TraceEvent>& trace);
/// Per channel, Accepts occur in the order of their Sends.
std::vector<Violation> check_order(const std::vector<TraceEvent>& trace);
/// No (receiver, channel, counter) is accepted twice.
std::vector<Violation> check_nodup(const std::vector<TraceEvent>& trace);
/// The three message properties together.
std::vector<Violation> check_messages(const std::vector<TraceEvent>& trace);

enum class AgreementMode {
  TotalOrder,  // one committed sequence; equal entries at equal order indices
  PerKey,      // per-key histories ordered by timestamp
};

/// Committed histories of correct replicas are prefix-compatible. Nodes
/// with a Crash event and nodes in `faulty` are excluded.
std::vector<Violation> check_agreement(const std::vector<TraceEvent>& trace, AgreementMode mode,
                                       const std::set<NodeId>& faulty = {});

/// Per node, ViewChange views strictly increase.
std::vector<Violation> check_view_monotonic(const std::vector<TraceEvent>& trace);

/// One observation that `node` believed it held the leader lease at `at`.
struct LeaseSample {
  Tick at = 0;
  NodeId node;
  ViewId view = 0;
};

/// No two nodes hold the leader lease at the same tick.
std::vector<Violation> check_lease_exclusion(const std::vector<LeaseSample>& samples);

/// Scans `haystacks` for any of `needles` (secrets that must never leave
/// the trusted boundary in the clear).
std::vector<Violation> check_secrets(const std::vector<Bytes>& haystacks,
                                     const std::vector<Bytes>& needles);

}  // namespace shieldrep::tracecheck
