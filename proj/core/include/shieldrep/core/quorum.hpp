#pragma once

#include <cstddef>

namespace shieldrep {

/// Smallest set of replicas whose agreement is final: n - f.
/// Throws Error(InvalidConfig) when n < 2f + 1.
std::size_t quorum_size(std::size_t n, std::size_t f);

/// Largest f a cluster of n nodes tolerates under the 2f+1 bound.
inline std::size_t max_faults(std::size_t n) { return n == 0 ? 0 : (n - 1) / 2; }

}  // namespace shieldrep
