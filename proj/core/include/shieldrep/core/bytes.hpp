#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "shieldrep/core/types.hpp"

namespace shieldrep {

/// Little-endian, length-prefixed writer used for every canonical encoding.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(std::size_t reserve) { buf_.reserve(reserve); }

  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u16(std::uint16_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& node(NodeId id) { return u32(id.value); }
  ByteWriter& channel(const ChannelId& cq);
  // u32 length prefix followed by the bytes.
  ByteWriter& bytes(std::span<const std::uint8_t> b);
  ByteWriter& str(std::string_view s);
  // Raw bytes without a prefix (fixed-size fields).
  ByteWriter& raw(std::span<const std::uint8_t> b);

  const Bytes& data() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }
  std::size_t size() const { return buf_.size(); }

 private:
  Bytes buf_;
};

/// Reader counterpart; every accessor throws Error(Errc::Malformed) on
/// truncated input.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  NodeId node() { return NodeId{u32()}; }
  ChannelId channel();
  Bytes bytes();
  std::string str();
  void raw(std::span<std::uint8_t> out);

  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }
  // Throws Malformed unless the whole input was consumed.
  void expect_done() const;

 private:
  std::span<const std::uint8_t> take(std::size_t n);

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::string to_hex(std::span<const std::uint8_t> b);
Bytes from_hex(std::string_view hex);
Bytes to_bytes(std::string_view s);
std::string to_string(std::span<const std::uint8_t> b);

}  // namespace shieldrep
