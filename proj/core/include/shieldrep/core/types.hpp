#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace shieldrep {

using Bytes = std::vector<std::uint8_t>;
using Tick = std::uint64_t;
using ViewId = std::uint64_t;
using Counter = std::uint64_t;
using RequestId = std::uint64_t;

inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kMacSize = 32;
inline constexpr std::size_t kKeySize = 32;

using Digest = std::array<std::uint8_t, kDigestSize>;
using Mac = std::array<std::uint8_t, kMacSize>;
using Key = std::array<std::uint8_t, kKeySize>;

struct NodeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline constexpr NodeId kNoNode{0xffffffffu};

struct ClientId {
  std::uint32_t value = 0;

  friend auto operator<=>(const ClientId&, const ClientId&) = default;
};

/// Directed communication endpoint between two nodes; (a->b) and (b->a)
/// are distinct channels. `lane` allows several logical channels per pair.
struct ChannelId {
  NodeId sender;
  NodeId receiver;
  std::uint16_t lane = 0;

  ChannelId reversed() const { return ChannelId{receiver, sender, lane}; }

  friend auto operator<=>(const ChannelId&, const ChannelId&) = default;
};

struct SequenceTuple {
  ViewId view = 0;
  ChannelId cq;
  Counter cnt = 0;

  friend auto operator<=>(const SequenceTuple&, const SequenceTuple&) = default;
};

/// Protocol-specific message tag. Values below kFirstProtocolKind are
/// control kinds (recovery, attestation) that a Recovering core may send.
struct MessageKind {
  std::uint16_t value = 0;

  friend auto operator<=>(const MessageKind&, const MessageKind&) = default;
};

inline constexpr std::uint16_t kFirstProtocolKind = 0x100;

inline bool is_control_kind(MessageKind k) { return k.value < kFirstProtocolKind; }

std::string to_string(NodeId id);
std::string to_string(const ChannelId& cq);

}  // namespace shieldrep
