#include "shieldrep/transport/link_security.hpp"

namespace shieldrep::transport {

ShieldedMessage PlainSecurity::shield(std::span<const std::uint8_t> payload, const ChannelId& cq,
                                      MessageKind kind) {
  ShieldedMessage msg;
  msg.payload.assign(payload.begin(), payload.end());
  msg.meta.kind = kind;
  msg.meta.tuple = SequenceTuple{1, cq, ++send_[cq]};
  return msg;
}

tcb::Verdict PlainSecurity::verify(const ShieldedMessage& msg) {
  const ChannelId& cq = msg.meta.tuple.cq;
  if (cq.receiver != owner_) return tcb::Reject{tcb::RejectReason::Malformed};
  Counter& rcnt = recv_[cq];
  const Counter cnt = msg.meta.tuple.cnt;
  if (cnt <= rcnt) return tcb::Reject{tcb::RejectReason::StaleCounter};
  tcb::Delivered d{msg.payload, msg.meta.tuple, msg.meta.kind, {}};
  if (cnt == rcnt + 1) {
    rcnt = cnt;
    return tcb::AcceptNow{std::move(d)};
  }
  future_[cq].emplace(cnt, std::move(d));
  return tcb::BufferFuture{msg.meta.tuple};
}

tcb::Verdict PlainSecurity::verify_frame(std::span<const std::uint8_t> wire) {
  auto msg = canonical_decode(wire);
  if (!msg) return tcb::Reject{tcb::RejectReason::Malformed};
  return verify(*msg);
}

std::vector<tcb::Delivered> PlainSecurity::drain_ready(const ChannelId& cq) {
  std::vector<tcb::Delivered> out;
  auto it = future_.find(cq);
  if (it == future_.end()) return out;
  Counter& rcnt = recv_[cq];
  auto& buf = it->second;
  while (!buf.empty()) {
    auto head = buf.begin();
    if (head->first <= rcnt) {
      buf.erase(head);
      continue;
    }
    if (head->first != rcnt + 1) break;
    rcnt = head->first;
    out.push_back(std::move(head->second));
    buf.erase(head);
  }
  return out;
}

Counter PlainSecurity::recv_counter(const ChannelId& cq) const {
  auto it = recv_.find(cq);
  return it == recv_.end() ? 0 : it->second;
}

}  // namespace shieldrep::transport
