#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shieldrep/core/types.hpp"

namespace shieldrep {

enum class EventKind : std::uint8_t { Trusted, Send, Accept, Commit, Crash, ViewChange, Reject };

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view s);

/// One append-only trace record.
///
/// Field use per kind:
///   Send/Accept  channel, cnt (message counter), digest (message digest), view
///   Commit       cnt (order index), digest (value digest), view, client, rid, key
///   ViewChange   view (new protocol view)
///   Reject       reason, optionally channel/cnt/digest of the rejected frame
struct TraceEvent {
  Tick at = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Trusted;
  NodeId node;
  std::optional<ChannelId> channel;
  Counter cnt = 0;
  std::optional<Digest> digest;
  ViewId view = 0;
  std::string reason;
  ClientId client;
  RequestId rid = 0;
  Bytes key;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Append-only event log with a logical clock. Timestamps never decrease;
/// `seq` totally orders events inside one tick.
class Trace {
 public:
  void set_now(Tick t);
  Tick now() const { return now_; }

  const TraceEvent& append(TraceEvent e);

  void trusted(NodeId node);
  void send(NodeId node, const Digest& digest, const ChannelId& cq, Counter cnt, ViewId view);
  void accept(NodeId node, const Digest& digest, const ChannelId& cq, Counter cnt, ViewId view);
  void commit(NodeId node, ClientId client, RequestId rid, const Bytes& key,
              const Digest& value_digest, std::uint64_t order_index, ViewId view);
  void crash(NodeId node);
  void view_change(NodeId node, ViewId view);
  void reject(NodeId node, std::string reason, std::optional<ChannelId> cq = std::nullopt,
              Counter cnt = 0, std::optional<Digest> digest = std::nullopt);

  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

 private:
  Tick now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::vector<TraceEvent> events_;
};

/// Line-delimited JSON, one record per event, fixed field names
/// (at, seq, kind, node, channel, cnt, digest, view, reason; Commit adds
/// client, rid, key).
std::string to_json_line(const TraceEvent& e);
void write_trace(std::ostream& os, const std::vector<TraceEvent>& events);
/// Throws Error(MalformedTrace) on unparsable input.
std::vector<TraceEvent> read_trace(std::istream& is);
TraceEvent parse_json_line(std::string_view line);

/// Order helper for the checkers: strict precedence on (at, seq).
inline bool precedes(const TraceEvent& a, const TraceEvent& b) {
  return a.at < b.at || (a.at == b.at && a.seq < b.seq);
}

}  // namespace shieldrep
