#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>

#include "shieldrep/core/trace.hpp"
#include "shieldrep/transport/link_security.hpp"
#include "shieldrep/transport/nic.hpp"

namespace shieldrep::transport {

enum class FrameType : std::uint8_t { Data = 1, LinkAck = 2, Batch = 3 };

/// An accepted message handed to a handler.
struct Inbound {
  NodeId from;
  MessageKind kind;
  SequenceTuple tuple;
  Bytes payload;
  Digest digest{};
};

using Handler = std::function<void(const Inbound&)>;

struct EndpointConfig {
  std::uint16_t lane = 0;
  std::size_t window = 32;        // unacknowledged shielded messages per channel
  std::size_t tx_capacity = 4096;
  std::size_t rx_capacity = 4096;
  std::size_t batch = 1;          // >1 coalesces up to this many messages per frame
  Tick retransmit_timeout = 18;
  // Reliable links over a lossy network: cumulative MAC'd acks plus
  // byte-identical retransmission. Off for stream transports, where frames
  // are the bare canonical encoding.
  bool link_acks = true;
};

struct EndpointStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t messages_sent = 0;  // first transmissions only
  std::uint64_t retransmits = 0;
  std::uint64_t acks_sent = 0;
  std::uint64_t accepted = 0;
  std::uint64_t buffered = 0;
  std::uint64_t rejected = 0;
  std::uint64_t rx_dropped = 0;     // RX ring overflow
  std::uint64_t tx_refused = 0;     // shield refused (status or key)
  std::map<std::uint16_t, std::uint64_t> sent_by_kind;
  std::map<std::string, std::uint64_t> rejects_by_reason;
};

/// RPC object: TX/RX rings, per-peer sessions and handler table. All calls
/// come from the owning replica's step function.
class Endpoint {
 public:
  Endpoint(NodeId owner, LinkSecurity& security, Nic& nic, EndpointConfig config,
           Trace* trace = nullptr);
  ~Endpoint();
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;

  NodeId owner() const { return owner_; }
  const EndpointConfig& config() const { return config_; }

  /// Last registration wins. Throws Error(LateRegistration) once any
  /// session exists.
  void reg_hdlr(MessageKind kind, Handler handler);

  /// Enqueues for `peer`; throws Error(QueueFull) when the TX ring is full.
  void send(NodeId peer, MessageKind kind, Bytes payload);
  void respond(const Inbound& req, MessageKind kind, Bytes payload) {
    send(req.from, kind, std::move(payload));
  }

  /// NIC side: a frame arrived. Dropped (and counted) if the RX ring is full.
  void deliver(Bytes frame);

  /// Drains RX: verify, dispatch, release buffered futures.
  std::size_t receive(Tick now);
  /// Flushes TX within the window, retransmits overdue frames, sends acks.
  std::size_t flush(Tick now);
  std::size_t poll(Tick now) {
    std::size_t n = receive(now);
    flush(now);
    return n;
  }

  /// Drops queued and in-flight traffic to `peer`.
  void close_session(NodeId peer);

  bool connected() const { return connected_; }
  std::size_t tx_depth() const { return tx_depth_; }
  std::size_t rx_depth() const { return rx_.size(); }
  std::size_t in_flight(NodeId peer) const;
  const EndpointStats& stats() const { return stats_; }

 private:
  struct Queued {
    MessageKind kind;
    Bytes payload;
  };
  struct InFlight {
    Bytes wire;
    Tick due = 0;
    Tick rto = 0;
  };
  struct Session {
    std::deque<Queued> queued;
    std::map<Counter, InFlight> inflight;
    bool ack_due = false;
  };

  Session& session(NodeId peer);
  void process_data(std::span<const std::uint8_t> wire);
  void process_ack(std::span<const std::uint8_t> body);
  void dispatch(const tcb::Delivered& d);
  void emit(NodeId peer, Bytes frame);
  ChannelId out_channel(NodeId peer) const { return ChannelId{owner_, peer, config_.lane}; }

  NodeId owner_;
  LinkSecurity& security_;
  Nic& nic_;
  EndpointConfig config_;
  Trace* trace_;
  bool connected_ = false;
  std::map<MessageKind, Handler> handlers_;
  std::map<NodeId, Session> sessions_;
  std::deque<Bytes> rx_;
  std::size_t tx_depth_ = 0;
  EndpointStats stats_;
};

std::unique_ptr<Endpoint> create_rpc(NodeId owner, LinkSecurity& security, Nic& nic,
                                     EndpointConfig config, Trace* trace = nullptr);

}  // namespace shieldrep::transport
