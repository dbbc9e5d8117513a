#pragma once

#include <optional>
#include <vector>

#include "shieldrep/core/request.hpp"

namespace shieldrep::tracecheck {

/// One client operation on a register keyed by `key`. `invoke` and
/// `response` come from one global monotone clock. For a Put, `value` is
/// the written value; for a Get, the returned one (`found` false for a miss).
struct HistoryOp {
  ClientId client;
  RequestId rid = 0;
  OpType op = OpType::Get;
  Bytes key;
  Bytes value;
  bool found = false;
  std::uint64_t invoke = 0;
  std::uint64_t response = 0;
  bool completed = false;
  /// Position in the replicas' commit order, when the trace provides it.
  std::optional<std::uint64_t> commit_index;
};

struct CheckResult {
  bool ok = true;
  /// Indices into the input history, in linearization (or serialization) order.
  std::vector<std::size_t> order;
  /// On failure: the shortest failing prefix of the offending key's ops.
  std::vector<HistoryOp> witness;
  std::string detail;
};

/// Maximum completed ops allowed to overlap in one key's history.
inline constexpr std::size_t kMaxWindow = 8;

/// Linearizability of a set of independent registers. Pending Puts may or
/// may not take effect; pending Gets are ignored. Throws Error(WindowTooWide)
/// if more than kMaxWindow completed ops on one key overlap.
CheckResult check_linearizable(const std::vector<HistoryOp>& history);

/// Sequential consistency: one total order over all ops that respects each
/// client's program order and register semantics. Uses commit indices as
/// the write order when every effective Put has one; otherwise falls back to
/// an exhaustive search (small histories only).
CheckResult check_sequential(const std::vector<HistoryOp>& history);

}  // namespace shieldrep::tracecheck
