#pragma once

#include <initializer_list>
#include <optional>
#include <span>

#include "shieldrep/core/types.hpp"

namespace shieldrep::crypto {

using ByteView = std::span<const std::uint8_t>;

Digest sha256(ByteView data);
// Hash over the concatenation of several fragments.
Digest sha256(std::initializer_list<ByteView> parts);

Mac hmac_sha256(const Key& key, ByteView data);
Mac hmac_sha256(const Key& key, std::initializer_list<ByteView> parts);

// Constant-time tag comparison.
bool tag_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Derives a 256-bit key from `master` bound to `label` and `context`.
Key derive_key(const Key& master, std::string_view label, ByteView context);

inline constexpr std::size_t kGcmNonceSize = 12;
inline constexpr std::size_t kGcmTagSize = 16;
using GcmNonce = std::array<std::uint8_t, kGcmNonceSize>;

// AES-256-GCM; output is ciphertext || 16-byte tag.
Bytes aead_seal(const Key& key, const GcmNonce& nonce, ByteView plaintext, ByteView aad);
// Returns nullopt when the tag does not verify.
std::optional<Bytes> aead_open(const Key& key, const GcmNonce& nonce, ByteView sealed,
                               ByteView aad);

GcmNonce nonce_from_counter(std::uint64_t hi, std::uint64_t counter);

}  // namespace shieldrep::crypto
