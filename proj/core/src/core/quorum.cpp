#include "shieldrep/core/quorum.hpp"

#include <string>

#include "shieldrep/core/error.hpp"

namespace shieldrep {

std::size_t quorum_size(std::size_t n, std::size_t f) {
  if (n < 2 * f + 1) {
    throw Error(Errc::InvalidConfig,
                "n=" + std::to_string(n) + " cannot tolerate f=" + std::to_string(f));
  }
  return n - f;
}

}  // namespace shieldrep
