#pragma once

#include "shieldrep/core/types.hpp"

namespace shieldrep::tcb {

/// Time-bounded grant. The granter honors it for
/// [granted_at, granted_at + duration + granter_slack]; the holder relies on
/// it only for [granted_at, granted_at + duration]. Both bounds inclusive.
struct Lease {
  NodeId holder;
  Tick granted_at = 0;
  Tick duration = 0;
  Tick granter_slack = 0;

  Tick holder_expiry() const { return granted_at + duration; }
  Tick granter_expiry() const { return granted_at + duration + granter_slack; }

  friend bool operator==(const Lease&, const Lease&) = default;
};

inline bool lease_valid(const Lease& l, Tick now, bool as_granter) {
  if (now < l.granted_at) return false;
  return now <= (as_granter ? l.granter_expiry() : l.holder_expiry());
}

enum class LeaseRole : std::uint8_t {
  Leadership,  // mutually exclusive across holders
  Liveness,    // one independent lease per holder (failure detection)
};

}  // namespace shieldrep::tcb
