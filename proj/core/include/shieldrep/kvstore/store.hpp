#pragma once

#include <map>
#include <optional>
#include <span>

#include "shieldrep/core/types.hpp"

namespace shieldrep::kvstore {

/// Lamport timestamp; total order on (counter, node).
struct Version {
  std::uint64_t counter = 0;
  NodeId node{0};

  friend auto operator<=>(const Version&, const Version&) = default;
};

/// Locator of a value slot in the untrusted arena.
struct Handle {
  std::size_t offset = 0;
  std::size_t capacity = 0;
};

/// Trusted per-key metadata; never leaves the trusted side.
struct EntryMeta {
  Digest value_digest{};
  Version ts;
  std::size_t value_len = 0;  // bytes stored in the arena
  Handle handle;
};

struct ReadResult {
  Bytes value;
  Version ts;
};

struct SnapshotRecord {
  Bytes key;
  Version ts;
  Bytes value;

  friend bool operator==(const SnapshotRecord&, const SnapshotRecord&) = default;
};

/// Partitioned key-value store. Keys and metadata sit in trusted memory; value
/// bytes (ciphertext in confidential mode) sit in an arena the host, and so the
/// adversary, can read and write.
class Store {
 public:
  /// `cipher_key` set means confidential mode.
  explicit Store(std::size_t capacity, std::optional<Key> cipher_key = std::nullopt);

  /// Throws Error(StoreFull) when a new key would exceed capacity.
  void write(std::span<const std::uint8_t> key, std::span<const std::uint8_t> value,
             Version ts);
  /// Throws Error(NotFound) or Error(IntegrityViolation).
  ReadResult get(std::span<const std::uint8_t> key) const;
  std::optional<Version> version(std::span<const std::uint8_t> key) const;
  bool contains(std::span<const std::uint8_t> key) const;

  std::size_t size() const { return meta_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool confidential() const { return cipher_key_.has_value(); }

  /// Keys in strictly ascending order.
  std::vector<Bytes> keys() const;

  /// Ordered (key, ts, value) records; every value is integrity-checked.
  std::vector<SnapshotRecord> export_snapshot() const;
  void import_snapshot(const std::vector<SnapshotRecord>& records);

  /// The untrusted region, exposed for fault injection and scans.
  std::span<std::uint8_t> arena() { return arena_; }
  std::span<const std::uint8_t> arena() const { return arena_; }

 private:
  Digest digest_of(std::span<const std::uint8_t> key, const Version& ts,
                   std::span<const std::uint8_t> stored) const;

  std::size_t capacity_;
  std::optional<Key> cipher_key_;
  std::map<Bytes, EntryMeta> meta_;
  Bytes arena_;
  std::uint64_t write_seq_ = 0;  // nonce source in confidential mode
};

Bytes encode_snapshot(const std::vector<SnapshotRecord>& records);
std::vector<SnapshotRecord> decode_snapshot(std::span<const std::uint8_t> bytes);

}  // namespace shieldrep::kvstore
