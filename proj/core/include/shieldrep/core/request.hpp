#pragma once

#include <optional>
#include <span>

#include "shieldrep/core/types.hpp"

namespace shieldrep {

enum class OpType : std::uint8_t { Put = 1, Get = 2 };

struct ClientRequest {
  ClientId client;
  RequestId request_id = 0;
  OpType op = OpType::Get;
  Bytes key;
  Bytes value;  // empty for Get
  ViewId known_view = 0;
  std::optional<NodeId> known_leader;

  friend bool operator==(const ClientRequest&, const ClientRequest&) = default;
};

Bytes encode(const ClientRequest& req);
/// Throws Error(Malformed).
ClientRequest decode_request(std::span<const std::uint8_t> bytes);

}  // namespace shieldrep
