#pragma once

#include <map>

#include "shieldrep/tcb/trusted_core.hpp"

namespace shieldrep::transport {

/// What an endpoint needs from the node's security boundary. The shielded
/// implementation forwards to the TrustedCore; the plain one keeps the same
/// counters and ordering without any cryptography (reference CFT runs).
class LinkSecurity {
 public:
  virtual ~LinkSecurity() = default;
  virtual ShieldedMessage shield(std::span<const std::uint8_t> payload, const ChannelId& cq,
                                 MessageKind kind) = 0;
  virtual tcb::Verdict verify(const ShieldedMessage& msg) = 0;
  virtual tcb::Verdict verify_frame(std::span<const std::uint8_t> wire) = 0;
  virtual std::vector<tcb::Delivered> drain_ready(const ChannelId& cq) = 0;
  virtual Counter recv_counter(const ChannelId& cq) const = 0;
  virtual Mac seal_ack(const ChannelId& data_cq, Counter acked) = 0;
  virtual bool open_ack(const ChannelId& data_cq, Counter acked, const Mac& tag) = 0;
};

class CoreSecurity final : public LinkSecurity {
 public:
  explicit CoreSecurity(tcb::TrustedCore& core) : core_(core) {}

  ShieldedMessage shield(std::span<const std::uint8_t> payload, const ChannelId& cq,
                         MessageKind kind) override {
    return core_.shield_request(payload, cq, kind);
  }
  tcb::Verdict verify(const ShieldedMessage& msg) override { return core_.verify_request(msg); }
  tcb::Verdict verify_frame(std::span<const std::uint8_t> wire) override {
    return core_.verify_frame(wire);
  }
  std::vector<tcb::Delivered> drain_ready(const ChannelId& cq) override {
    return core_.drain_ready(cq);
  }
  Counter recv_counter(const ChannelId& cq) const override { return core_.recv_counter(cq); }
  Mac seal_ack(const ChannelId& data_cq, Counter acked) override {
    return core_.seal_link_ack(data_cq, acked);
  }
  bool open_ack(const ChannelId& data_cq, Counter acked, const Mac& tag) override {
    return core_.open_link_ack(data_cq, acked, tag);
  }

 private:
  tcb::TrustedCore& core_;
};

/// Counters and in-order release only; zero MACs, no verification.
class PlainSecurity final : public LinkSecurity {
 public:
  explicit PlainSecurity(NodeId owner) : owner_(owner) {}

  ShieldedMessage shield(std::span<const std::uint8_t> payload, const ChannelId& cq,
                         MessageKind kind) override;
  tcb::Verdict verify(const ShieldedMessage& msg) override;
  tcb::Verdict verify_frame(std::span<const std::uint8_t> wire) override;
  std::vector<tcb::Delivered> drain_ready(const ChannelId& cq) override;
  Counter recv_counter(const ChannelId& cq) const override;
  Mac seal_ack(const ChannelId&, Counter) override { return Mac{}; }
  bool open_ack(const ChannelId&, Counter, const Mac&) override { return true; }

 private:
  NodeId owner_;
  std::map<ChannelId, Counter> send_;
  std::map<ChannelId, Counter> recv_;
  std::map<ChannelId, std::map<Counter, tcb::Delivered>> future_;
};

}  // namespace shieldrep::transport
