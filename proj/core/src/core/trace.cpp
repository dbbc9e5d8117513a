#include "shieldrep/core/trace.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"
#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Trusted: return "Trusted";
    case EventKind::Send: return "Send";
    case EventKind::Accept: return "Accept";
    case EventKind::Commit: return "Commit";
    case EventKind::Crash: return "Crash";
    case EventKind::ViewChange: return "ViewChange";
    case EventKind::Reject: return "Reject";
  }
  return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::Trusted, EventKind::Send, EventKind::Accept, EventKind::Commit,
                 EventKind::Crash, EventKind::ViewChange, EventKind::Reject}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

void Trace::set_now(Tick t) {
  if (t > now_) now_ = t;
}

const TraceEvent& Trace::append(TraceEvent e) {
  e.at = now_;
  e.seq = next_seq_++;
  events_.push_back(std::move(e));
  return events_.back();
}

void Trace::trusted(NodeId node) {
  TraceEvent e;
  e.kind = EventKind::Trusted;
  e.node = node;
  append(std::move(e));
}

void Trace::send(NodeId node, const Digest& digest, const ChannelId& cq, Counter cnt,
                 ViewId view) {
  TraceEvent e;
  e.kind = EventKind::Send;
  e.node = node;
  e.digest = digest;
  e.channel = cq;
  e.cnt = cnt;
  e.view = view;
  append(std::move(e));
}

void Trace::accept(NodeId node, const Digest& digest, const ChannelId& cq, Counter cnt,
                   ViewId view) {
  TraceEvent e;
  e.kind = EventKind::Accept;
  e.node = node;
  e.digest = digest;
  e.channel = cq;
  e.cnt = cnt;
  e.view = view;
  append(std::move(e));
}

void Trace::commit(NodeId node, ClientId client, RequestId rid, const Bytes& key,
                   const Digest& value_digest, std::uint64_t order_index, ViewId view) {
  TraceEvent e;
  e.kind = EventKind::Commit;
  e.node = node;
  e.client = client;
  e.rid = rid;
  e.key = key;
  e.digest = value_digest;
  e.cnt = order_index;
  e.view = view;
  append(std::move(e));
}

void Trace::crash(NodeId node) {
  TraceEvent e;
  e.kind = EventKind::Crash;
  e.node = node;
  append(std::move(e));
}

void Trace::view_change(NodeId node, ViewId view) {
  TraceEvent e;
  e.kind = EventKind::ViewChange;
  e.node = node;
  e.view = view;
  append(std::move(e));
}

void Trace::reject(NodeId node, std::string reason, std::optional<ChannelId> cq, Counter cnt,
                   std::optional<Digest> digest) {
  TraceEvent e;
  e.kind = EventKind::Reject;
  e.node = node;
  e.reason = std::move(reason);
  e.channel = cq;
  e.cnt = cnt;
  e.digest = digest;
  append(std::move(e));
}

std::string to_json_line(const TraceEvent& e) {
  ordered_json j;
  j["at"] = e.at;
  j["seq"] = e.seq;
  j["kind"] = std::string(to_string(e.kind));
  j["node"] = e.node.value;
  j["channel"] = e.channel ? ordered_json(to_string(*e.channel)) : ordered_json(nullptr);
  j["cnt"] = e.cnt;
  j["digest"] = e.digest ? ordered_json(to_hex(*e.digest)) : ordered_json(nullptr);
  j["view"] = e.view;
  j["reason"] = e.reason;
  if (e.kind == EventKind::Commit) {
    j["client"] = e.client.value;
    j["rid"] = e.rid;
    j["key"] = to_hex(e.key);
  }
  return j.dump();
}

void write_trace(std::ostream& os, const std::vector<TraceEvent>& events) {
  for (const auto& e : events) os << to_json_line(e) << '\n';
}

namespace {

ChannelId parse_channel(const std::string& s) {
  auto gt = s.find('>');
  auto slash = s.find('/');
  if (gt == std::string::npos || slash == std::string::npos || slash < gt) {
    throw Error(Errc::MalformedTrace, "bad channel '" + s + "'");
  }
  ChannelId cq;
  cq.sender.value = static_cast<std::uint32_t>(std::stoul(s.substr(0, gt)));
  cq.receiver.value = static_cast<std::uint32_t>(std::stoul(s.substr(gt + 1, slash - gt - 1)));
  cq.lane = static_cast<std::uint16_t>(std::stoul(s.substr(slash + 1)));
  return cq;
}

}  // namespace

TraceEvent parse_json_line(std::string_view line) {
  try {
    auto j = ordered_json::parse(line);
    TraceEvent e;
    e.at = j.at("at").get<Tick>();
    e.seq = j.at("seq").get<std::uint64_t>();
    auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw Error(Errc::MalformedTrace, "unknown kind");
    e.kind = *kind;
    e.node.value = j.at("node").get<std::uint32_t>();
    if (!j.at("channel").is_null()) e.channel = parse_channel(j.at("channel").get<std::string>());
    e.cnt = j.at("cnt").get<Counter>();
    if (!j.at("digest").is_null()) {
      auto raw = from_hex(j.at("digest").get<std::string>());
      if (raw.size() != kDigestSize) throw Error(Errc::MalformedTrace, "digest size");
      Digest d{};
      std::copy(raw.begin(), raw.end(), d.begin());
      e.digest = d;
    }
    e.view = j.at("view").get<ViewId>();
    e.reason = j.at("reason").get<std::string>();
    if (e.kind == EventKind::Commit) {
      e.client.value = j.at("client").get<std::uint32_t>();
      e.rid = j.at("rid").get<RequestId>();
      e.key = from_hex(j.at("key").get<std::string>());
    }
    return e;
  } catch (const Error& err) {
    throw Error(Errc::MalformedTrace, err.what());
  } catch (const std::exception& ex) {
    throw Error(Errc::MalformedTrace, ex.what());
  }
}

std::vector<TraceEvent> read_trace(std::istream& is) {
  std::vector<TraceEvent> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(parse_json_line(line));
  }
  return out;
}

}  // namespace shieldrep
