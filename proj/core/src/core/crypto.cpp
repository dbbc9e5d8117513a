#include "shieldrep/core/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <memory>

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep::crypto {
namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};

// Per-thread reusable digest context; EVP_MD_CTX_new per call dominates the
// cost of hashing short messages.
EVP_MD_CTX* thread_md_ctx() {
  thread_local std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  return ctx.get();
}

void check(int ok, const char* what) {
  if (ok != 1) throw Error(Errc::Io, std::string("openssl: ") + what);
}

}  // namespace

Digest sha256(ByteView data) { return sha256({data}); }

Digest sha256(std::initializer_list<ByteView> parts) {
  EVP_MD_CTX* ctx = thread_md_ctx();
  check(EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr), "DigestInit");
  for (auto p : parts) check(EVP_DigestUpdate(ctx, p.data(), p.size()), "DigestUpdate");
  Digest out{};
  unsigned int len = 0;
  check(EVP_DigestFinal_ex(ctx, out.data(), &len), "DigestFinal");
  return out;
}

Mac hmac_sha256(const Key& key, ByteView data) { return hmac_sha256(key, {data}); }

Mac hmac_sha256(const Key& key, std::initializer_list<ByteView> parts) {
  Bytes joined;
  for (auto p : parts) joined.insert(joined.end(), p.begin(), p.end());
  Mac out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), joined.data(), joined.size(),
           out.data(), &len) == nullptr) {
    throw Error(Errc::Io, "openssl: HMAC");
  }
  return out;
}

bool tag_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

Key derive_key(const Key& master, std::string_view label, ByteView context) {
  ByteWriter w;
  w.str(label).bytes(context);
  return hmac_sha256(master, w.data());
}

GcmNonce nonce_from_counter(std::uint64_t hi, std::uint64_t counter) {
  GcmNonce n{};
  for (int i = 0; i < 4; ++i) n[i] = static_cast<std::uint8_t>(hi >> (8 * i));
  for (int i = 0; i < 8; ++i) n[4 + i] = static_cast<std::uint8_t>(counter >> (8 * i));
  return n;
}

Bytes aead_seal(const Key& key, const GcmNonce& nonce, ByteView plaintext, ByteView aad) {
  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "EncryptInit");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kGcmNonceSize, nullptr), "ivlen");
  check(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "EncryptInit");
  int len = 0;
  if (!aad.empty()) {
    check(EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
          "aad");
  }
  Bytes out(plaintext.size() + kGcmTagSize);
  int written = 0;
  if (!plaintext.empty()) {
    check(EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                            static_cast<int>(plaintext.size())),
          "EncryptUpdate");
    written = len;
  }
  check(EVP_EncryptFinal_ex(ctx.get(), out.data() + written, &len), "EncryptFinal");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagSize,
                            out.data() + plaintext.size()),
        "get tag");
  return out;
}

std::optional<Bytes> aead_open(const Key& key, const GcmNonce& nonce, ByteView sealed,
                               ByteView aad) {
  if (sealed.size() < kGcmTagSize) return std::nullopt;
  const std::size_t ct_len = sealed.size() - kGcmTagSize;
  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "DecryptInit");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kGcmNonceSize, nullptr), "ivlen");
  check(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "DecryptInit");
  int len = 0;
  if (!aad.empty()) {
    check(EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
          "aad");
  }
  Bytes out(ct_len);
  int written = 0;
  if (ct_len > 0) {
    check(EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), static_cast<int>(ct_len)),
          "DecryptUpdate");
    written = len;
  }
  Bytes tag(sealed.begin() + static_cast<std::ptrdiff_t>(ct_len), sealed.end());
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagSize, tag.data()), "set tag");
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + written, &len) != 1) return std::nullopt;
  return out;
}

}  // namespace shieldrep::crypto
