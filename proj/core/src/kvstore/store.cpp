#include "shieldrep/kvstore/store.hpp"

#include <cstring>

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/crypto.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep::kvstore {

namespace {

// Confidential slots: [nonce 12][ciphertext || tag].
constexpr std::size_t kNoncePrefix = crypto::kGcmNonceSize;

}  // namespace

Store::Store(std::size_t capacity, std::optional<Key> cipher_key)
    : capacity_(capacity), cipher_key_(cipher_key) {}

Digest Store::digest_of(std::span<const std::uint8_t> key, const Version& ts,
                        std::span<const std::uint8_t> stored) const {
  ByteWriter w(key.size() + 16 + 4);
  w.bytes(key).u64(ts.counter).node(ts.node);
  return crypto::sha256({w.data(), stored});
}

void Store::write(std::span<const std::uint8_t> key, std::span<const std::uint8_t> value,
                  Version ts) {
  if (key.empty()) throw Error(Errc::Malformed, "empty key");
  Bytes k(key.begin(), key.end());
  auto it = meta_.find(k);
  if (it == meta_.end() && meta_.size() >= capacity_) {
    throw Error(Errc::StoreFull, "capacity " + std::to_string(capacity_) + " reached");
  }

  Bytes stored;
  if (cipher_key_) {
    const auto nonce = crypto::nonce_from_counter(0x6b76, ++write_seq_);
    stored.assign(nonce.begin(), nonce.end());
    Bytes sealed = crypto::aead_seal(*cipher_key_, nonce, value, key);
    stored.insert(stored.end(), sealed.begin(), sealed.end());
  } else {
    stored.assign(value.begin(), value.end());
  }

  EntryMeta m;
  if (it != meta_.end() && it->second.handle.capacity >= stored.size()) {
    m.handle = it->second.handle;
  } else {
    // One slot per key; a grown value moves to a fresh slot at the end.
    m.handle = Handle{arena_.size(), stored.size()};
    arena_.resize(arena_.size() + stored.size());
  }
  std::memcpy(arena_.data() + m.handle.offset, stored.data(), stored.size());
  m.value_len = stored.size();
  m.ts = ts;
  m.value_digest = digest_of(key, ts, stored);
  meta_[std::move(k)] = m;
}

ReadResult Store::get(std::span<const std::uint8_t> key) const {
  auto it = meta_.find(Bytes(key.begin(), key.end()));
  if (it == meta_.end()) throw Error(Errc::NotFound, "key " + to_hex(key));
  const EntryMeta& m = it->second;
  // Copy out of host memory first so the check and the use see the same bytes.
  Bytes stored(arena_.begin() + static_cast<std::ptrdiff_t>(m.handle.offset),
               arena_.begin() + static_cast<std::ptrdiff_t>(m.handle.offset + m.value_len));
  if (digest_of(key, m.ts, stored) != m.value_digest) {
    throw Error(Errc::IntegrityViolation, "key " + to_hex(key));
  }
  if (!cipher_key_) return ReadResult{std::move(stored), m.ts};

  if (stored.size() < kNoncePrefix) throw Error(Errc::IntegrityViolation, "short slot");
  crypto::GcmNonce nonce;
  std::memcpy(nonce.data(), stored.data(), kNoncePrefix);
  auto plain = crypto::aead_open(*cipher_key_, nonce,
                                 std::span(stored).subspan(kNoncePrefix), key);
  if (!plain) throw Error(Errc::IntegrityViolation, "key " + to_hex(key));
  return ReadResult{std::move(*plain), m.ts};
}

std::optional<Version> Store::version(std::span<const std::uint8_t> key) const {
  auto it = meta_.find(Bytes(key.begin(), key.end()));
  if (it == meta_.end()) return std::nullopt;
  return it->second.ts;
}

bool Store::contains(std::span<const std::uint8_t> key) const {
  return meta_.contains(Bytes(key.begin(), key.end()));
}

std::vector<Bytes> Store::keys() const {
  std::vector<Bytes> out;
  out.reserve(meta_.size());
  for (const auto& [k, m] : meta_) out.push_back(k);
  return out;
}

std::vector<SnapshotRecord> Store::export_snapshot() const {
  std::vector<SnapshotRecord> out;
  out.reserve(meta_.size());
  for (const auto& [k, m] : meta_) {
    auto r = get(k);
    out.push_back(SnapshotRecord{k, r.ts, std::move(r.value)});
  }
  return out;
}

void Store::import_snapshot(const std::vector<SnapshotRecord>& records) {
  for (const auto& r : records) write(r.key, r.value, r.ts);
}

Bytes encode_snapshot(const std::vector<SnapshotRecord>& records) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) w.bytes(r.key).u64(r.ts.counter).node(r.ts.node).bytes(r.value);
  return std::move(w).take();
}

std::vector<SnapshotRecord> decode_snapshot(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto n = r.u32();
  std::vector<SnapshotRecord> out;
  out.reserve(std::min<std::size_t>(n, r.remaining()));
  for (std::uint32_t i = 0; i < n; ++i) {
    SnapshotRecord rec;
    rec.key = r.bytes();
    rec.ts.counter = r.u64();
    rec.ts.node = r.node();
    rec.value = r.bytes();
    out.push_back(std::move(rec));
  }
  r.expect_done();
  return out;
}

}  // namespace shieldrep::kvstore
