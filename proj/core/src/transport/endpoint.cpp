#include "shieldrep/transport/endpoint.hpp"

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep::transport {

namespace {

constexpr Tick kMaxBackoff = 8;

Bytes data_frame(const Bytes& wire) {
  Bytes frame;
  frame.reserve(wire.size() + 1);
  frame.push_back(static_cast<std::uint8_t>(FrameType::Data));
  frame.insert(frame.end(), wire.begin(), wire.end());
  return frame;
}

}  // namespace

Endpoint::Endpoint(NodeId owner, LinkSecurity& security, Nic& nic, EndpointConfig config,
                   Trace* trace)
    : owner_(owner), security_(security), nic_(nic), config_(config), trace_(trace) {
  if (config_.window == 0) config_.window = 1;
  if (config_.batch == 0) config_.batch = 1;
  nic_.attach(owner_, config_.lane, this);
}

Endpoint::~Endpoint() { nic_.detach(owner_, config_.lane); }

std::unique_ptr<Endpoint> create_rpc(NodeId owner, LinkSecurity& security, Nic& nic,
                                     EndpointConfig config, Trace* trace) {
  return std::make_unique<Endpoint>(owner, security, nic, config, trace);
}

void Endpoint::reg_hdlr(MessageKind kind, Handler handler) {
  if (connected_) {
    throw Error(Errc::LateRegistration,
                "handler for kind " + std::to_string(kind.value) + " after connect");
  }
  handlers_[kind] = std::move(handler);
}

Endpoint::Session& Endpoint::session(NodeId peer) {
  connected_ = true;
  return sessions_[peer];
}

void Endpoint::send(NodeId peer, MessageKind kind, Bytes payload) {
  if (tx_depth_ >= config_.tx_capacity) {
    throw Error(Errc::QueueFull, "TX ring full at " + to_string(owner_));
  }
  session(peer).queued.push_back(Queued{kind, std::move(payload)});
  ++tx_depth_;
}

void Endpoint::deliver(Bytes frame) {
  if (rx_.size() >= config_.rx_capacity) {
    ++stats_.rx_dropped;
    return;
  }
  rx_.push_back(std::move(frame));
}

void Endpoint::dispatch(const tcb::Delivered& d) {
  ++stats_.accepted;
  auto it = handlers_.find(d.kind);
  if (it == handlers_.end()) {
    ++stats_.rejected;
    ++stats_.rejects_by_reason["Malformed"];
    if (trace_) {
      trace_->reject(owner_, "Malformed", d.tuple.cq, d.tuple.cnt, d.digest);
    }
    return;
  }
  Inbound in{d.tuple.cq.sender, d.kind, d.tuple, d.payload, d.digest};
  it->second(in);
}

void Endpoint::process_data(std::span<const std::uint8_t> wire) {
  auto msg = canonical_decode(wire);
  tcb::Verdict verdict = msg ? security_.verify(*msg) : security_.verify_frame(wire);
  if (auto* acc = std::get_if<tcb::AcceptNow>(&verdict)) {
    const ChannelId cq = acc->msg.tuple.cq;
    if (config_.link_acks) session(cq.sender).ack_due = true;
    dispatch(acc->msg);
    for (const auto& d : security_.drain_ready(cq)) dispatch(d);
    return;
  }
  if (std::holds_alternative<tcb::BufferFuture>(verdict)) {
    ++stats_.buffered;
    return;
  }
  const auto& rej = std::get<tcb::Reject>(verdict);
  ++stats_.rejected;
  ++stats_.rejects_by_reason[std::string(tcb::to_string(rej.reason))];
  // A stale duplicate usually means our ack was lost; re-acknowledge.
  if (config_.link_acks && msg && rej.reason == tcb::RejectReason::StaleCounter &&
      msg->meta.receiver() == owner_ && msg->meta.tuple.cq.lane == config_.lane) {
    session(msg->meta.sender()).ack_due = true;
  }
}

void Endpoint::process_ack(std::span<const std::uint8_t> body) {
  ChannelId data_cq;
  Counter acked = 0;
  Mac tag{};
  try {
    ByteReader r(body);
    data_cq = r.channel();
    acked = r.u64();
    r.raw(tag);
    r.expect_done();
  } catch (const Error&) {
    return;
  }
  if (data_cq.sender != owner_ || data_cq.lane != config_.lane) return;
  if (!security_.open_ack(data_cq, acked, tag)) return;
  auto it = sessions_.find(data_cq.receiver);
  if (it == sessions_.end()) return;
  auto& inflight = it->second.inflight;
  inflight.erase(inflight.begin(), inflight.upper_bound(acked));
}

std::size_t Endpoint::receive(Tick now) {
  std::size_t frames = 0;
  while (!rx_.empty()) {
    Bytes frame = std::move(rx_.front());
    rx_.pop_front();
    ++frames;
    if (!config_.link_acks) {
      process_data(frame);
      continue;
    }
    if (frame.empty()) continue;
    std::span<const std::uint8_t> body(frame.data() + 1, frame.size() - 1);
    switch (static_cast<FrameType>(frame[0])) {
      case FrameType::Data:
        process_data(body);
        break;
      case FrameType::LinkAck:
        process_ack(body);
        break;
      case FrameType::Batch: {
        std::vector<Bytes> parts;
        try {
          ByteReader r(body);
          const auto count = r.u16();
          for (std::uint16_t i = 0; i < count; ++i) parts.push_back(r.bytes());
          r.expect_done();
        } catch (const Error&) {
          process_data(body);  // logs Malformed
          break;
        }
        for (const auto& p : parts) process_data(p);
        break;
      }
      default:
        process_data(body);
        break;
    }
  }
  return frames;
}

void Endpoint::emit(NodeId peer, Bytes frame) {
  ++stats_.frames_sent;
  stats_.bytes_sent += frame.size();
  nic_.transmit(ChannelId{owner_, peer, config_.lane}, std::move(frame));
}

std::size_t Endpoint::flush(Tick now) {
  std::size_t sent = 0;
  for (auto& [peer, s] : sessions_) {
    if (s.ack_due) {
      s.ack_due = false;
      const ChannelId data_cq{peer, owner_, config_.lane};
      const Counter acked = security_.recv_counter(data_cq);
      try {
        const Mac tag = security_.seal_ack(data_cq, acked);
        ByteWriter w(1 + 10 + 8 + kMacSize);
        w.u8(static_cast<std::uint8_t>(FrameType::LinkAck)).channel(data_cq).u64(acked).raw(tag);
        ++stats_.acks_sent;
        emit(peer, std::move(w).take());
      } catch (const Error&) {
        // No reverse key (peer removed); nothing to acknowledge with.
      }
    }

    for (auto& [cnt, f] : s.inflight) {
      if (now < f.due) continue;
      f.rto = std::min(f.rto * 2, config_.retransmit_timeout * kMaxBackoff);
      f.due = now + f.rto;
      ++stats_.retransmits;
      emit(peer, data_frame(f.wire));
    }

    std::vector<Bytes> fresh;
    while (!s.queued.empty() && (!config_.link_acks || s.inflight.size() < config_.window)) {
      Queued q = std::move(s.queued.front());
      s.queued.pop_front();
      --tx_depth_;
      ShieldedMessage msg;
      try {
        msg = security_.shield(q.payload, out_channel(peer), q.kind);
      } catch (const Error&) {
        ++stats_.tx_refused;
        continue;
      }
      Bytes wire = canonical_encode(msg);
      ++stats_.messages_sent;
      ++stats_.sent_by_kind[q.kind.value];
      if (config_.link_acks) {
        s.inflight[msg.meta.tuple.cnt] =
            InFlight{wire, now + config_.retransmit_timeout, config_.retransmit_timeout};
      }
      fresh.push_back(std::move(wire));
      ++sent;
    }

    if (!config_.link_acks) {
      for (auto& w : fresh) emit(peer, std::move(w));
      continue;
    }
    for (std::size_t i = 0; i < fresh.size(); i += config_.batch) {
      const std::size_t end = std::min(fresh.size(), i + config_.batch);
      if (end - i == 1) {
        emit(peer, data_frame(fresh[i]));
        continue;
      }
      ByteWriter w;
      w.u8(static_cast<std::uint8_t>(FrameType::Batch)).u16(static_cast<std::uint16_t>(end - i));
      for (std::size_t j = i; j < end; ++j) w.bytes(fresh[j]);
      emit(peer, std::move(w).take());
    }
  }
  return sent;
}

void Endpoint::close_session(NodeId peer) {
  auto it = sessions_.find(peer);
  if (it == sessions_.end()) return;
  tx_depth_ -= it->second.queued.size();
  sessions_.erase(it);
}

std::size_t Endpoint::in_flight(NodeId peer) const {
  auto it = sessions_.find(peer);
  return it == sessions_.end() ? 0 : it->second.inflight.size();
}

}  // namespace shieldrep::transport
