#pragma once

#include <optional>
#include <span>

#include "shieldrep/core/types.hpp"

namespace shieldrep {

struct MessageMeta {
  SequenceTuple tuple;
  MessageKind kind;

  NodeId sender() const { return tuple.cq.sender; }
  NodeId receiver() const { return tuple.cq.receiver; }

  friend bool operator==(const MessageMeta&, const MessageMeta&) = default;
};

/// Authenticated network envelope. The MAC covers the canonical header and
/// the payload; in confidential mode the payload is AEAD ciphertext.
struct ShieldedMessage {
  Bytes payload;
  MessageMeta meta;
  Mac mac{};

  friend bool operator==(const ShieldedMessage&, const ShieldedMessage&) = default;
};

// kind u16 | view u64 | sender u32 | receiver u32 | lane u16 | cnt u64 | payload_len u32
inline constexpr std::size_t kEnvelopeHeaderSize = 2 + 8 + 4 + 4 + 2 + 8 + 4;

/// Header bytes only; doubles as AEAD associated data.
Bytes encode_header(const MessageMeta& meta, std::size_t payload_len);

/// Bytes the MAC is computed over: header || payload.
Bytes mac_input(const MessageMeta& meta, std::span<const std::uint8_t> payload);

/// Canonical, self-delimiting encoding: header || payload || mac.
Bytes canonical_encode(const ShieldedMessage& msg);

/// Inverse of canonical_encode; nullopt on any structural error.
std::optional<ShieldedMessage> canonical_decode(std::span<const std::uint8_t> bytes);

/// Message identity used by the trace checkers.
Digest message_digest(std::span<const std::uint8_t> encoded);

}  // namespace shieldrep
