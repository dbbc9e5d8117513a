#pragma once

#include <string>

#include "shieldrep/core/types.hpp"

namespace shieldrep::attestation {

/// What gets measured: the protocol code identity.
struct CodeIdentity {
  std::string name;
  std::string version;
  std::string flags;
};

/// The identity every genuine replica binary reports.
CodeIdentity genuine_replica_identity();

struct Measurement {
  Digest digest{};

  friend auto operator<=>(const Measurement&, const Measurement&) = default;
};

inline constexpr std::size_t kNonceSize = 16;
using Nonce = std::array<std::uint8_t, kNonceSize>;

struct SignedQuote {
  Measurement measurement;
  Mac hw_tag{};     // MAC(measurement || nonce) under the machine's hardware key
  Mac outer_sig{};  // binds the quote to the challenger's ephemeral key
  Nonce nonce{};
};

/// Deterministic digest of the code identity.
Measurement attest(const CodeIdentity& code);

SignedQuote generate_quote(const Measurement& m, const Key& hw_key, const Key& challenger_pub,
                           const Nonce& nonce);

bool verify_hw_tag(const SignedQuote& q, const Key& hw_key);
bool verify_binding(const SignedQuote& q, const Key& challenger_pub);

}  // namespace shieldrep::attestation
