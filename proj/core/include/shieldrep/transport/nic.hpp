#pragma once

#include "shieldrep/core/types.hpp"

namespace shieldrep::transport {

class Endpoint;

/// Untrusted network interface an Endpoint transmits through. `link` names
/// the directed (from, to, lane) path; frames are opaque bytes.
class Nic {
 public:
  virtual ~Nic() = default;
  /// Throws Error(DuplicateEndpoint) if (owner, lane) is already attached.
  virtual void attach(NodeId owner, std::uint16_t lane, Endpoint* ep) = 0;
  virtual void detach(NodeId owner, std::uint16_t lane) = 0;
  virtual void transmit(const ChannelId& link, Bytes frame) = 0;
};

}  // namespace shieldrep::transport
