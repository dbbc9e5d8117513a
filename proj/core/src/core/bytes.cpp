#include "shieldrep/core/bytes.hpp"

#include <cstring>

#include "shieldrep/core/error.hpp"

namespace shieldrep {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Malformed: return "Malformed";
    case Errc::NoKey: return "NoKey";
    case Errc::NotOperational: return "NotOperational";
    case Errc::Conflict: return "Conflict";
    case Errc::DuplicateEndpoint: return "DuplicateEndpoint";
    case Errc::LateRegistration: return "LateRegistration";
    case Errc::QueueFull: return "QueueFull";
    case Errc::StoreFull: return "Full";
    case Errc::NotFound: return "NotFound";
    case Errc::IntegrityViolation: return "IntegrityViolation";
    case Errc::JoinDenied: return "JoinDenied";
    case Errc::MalformedTrace: return "MalformedTrace";
    case Errc::WindowTooWide: return "WindowTooWide";
    case Errc::TickBudgetExceeded: return "TickBudgetExceeded";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

std::string to_string(NodeId id) { return std::to_string(id.value); }

std::string to_string(const ChannelId& cq) {
  return std::to_string(cq.sender.value) + ">" + std::to_string(cq.receiver.value) + "/" +
         std::to_string(cq.lane);
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::u16(std::uint16_t v) {
  for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

ByteWriter& ByteWriter::channel(const ChannelId& cq) {
  return node(cq.sender).node(cq.receiver).u16(cq.lane);
}

ByteWriter& ByteWriter::bytes(std::span<const std::uint8_t> b) {
  u32(static_cast<std::uint32_t>(b.size()));
  return raw(b);
}

ByteWriter& ByteWriter::str(std::string_view s) {
  return bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

ByteWriter& ByteWriter::raw(std::span<const std::uint8_t> b) {
  buf_.insert(buf_.end(), b.begin(), b.end());
  return *this;
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (in_.size() - pos_ < n) throw Error(Errc::Malformed, "truncated input");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint16_t ByteReader::u16() {
  auto s = take(2);
  return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
}

std::uint32_t ByteReader::u32() {
  auto s = take(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | s[i];
  return v;
}

std::uint64_t ByteReader::u64() {
  auto s = take(8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | s[i];
  return v;
}

ChannelId ByteReader::channel() {
  ChannelId cq;
  cq.sender = node();
  cq.receiver = node();
  cq.lane = u16();
  return cq;
}

Bytes ByteReader::bytes() {
  auto n = u32();
  auto s = take(n);
  return Bytes(s.begin(), s.end());
}

std::string ByteReader::str() {
  auto b = bytes();
  return std::string(b.begin(), b.end());
}

void ByteReader::raw(std::span<std::uint8_t> out) {
  auto s = take(out.size());
  std::memcpy(out.data(), s.data(), s.size());
}

void ByteReader::expect_done() const {
  if (!done()) throw Error(Errc::Malformed, "trailing bytes");
}

std::string to_hex(std::span<const std::uint8_t> b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto c : b) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::Malformed, "odd hex length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(Errc::Malformed, "bad hex digit");
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_string(std::span<const std::uint8_t> b) { return std::string(b.begin(), b.end()); }

}  // namespace shieldrep
