#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "shieldrep/transport/nic.hpp"

namespace shieldrep::transport {

/// Loopback TCP NIC. Frames are a 4-byte big-endian length followed by the
/// bare canonical encoding. One reader thread per inbound connection feeds a
/// per-endpoint inbox; `pump` hands the inbox to the endpoint from the
/// owner's thread so the trusted core keeps a single owner.
///
/// Endpoints on this NIC must run with link_acks off: TCP already delivers
/// in order and exactly once per connection.
class TcpNic final : public Nic {
 public:
  TcpNic();
  ~TcpNic() override;
  TcpNic(const TcpNic&) = delete;
  TcpNic& operator=(const TcpNic&) = delete;

  void attach(NodeId owner, std::uint16_t lane, Endpoint* ep) override;
  void detach(NodeId owner, std::uint16_t lane) override;
  void transmit(const ChannelId& link, Bytes frame) override;

  /// Moves received frames into the endpoint's RX ring; returns how many.
  std::size_t pump(NodeId owner, std::uint16_t lane = 0);
  /// Blocks until a frame is queued for (owner, lane) or the timeout passes.
  bool wait(NodeId owner, std::uint16_t lane, std::chrono::milliseconds timeout);

  std::uint16_t port(NodeId owner, std::uint16_t lane = 0) const;

 private:
  struct Listener;
  struct Outbound;
  using Addr = std::pair<NodeId, std::uint16_t>;

  void accept_loop(Listener* l);
  void read_loop(int fd, Listener* l);
  Outbound& outbound(const ChannelId& link);

  mutable std::mutex mu_;
  std::map<Addr, std::unique_ptr<Listener>> listeners_;
  std::map<ChannelId, std::unique_ptr<Outbound>> outbound_;
  std::vector<std::thread> readers_;
  std::atomic<bool> stopping_{false};
};

}  // namespace shieldrep::transport
