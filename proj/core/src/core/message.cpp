#include "shieldrep/core/message.hpp"

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/crypto.hpp"
#include "shieldrep/core/error.hpp"

namespace shieldrep {
namespace {

void write_header(ByteWriter& w, const MessageMeta& meta, std::size_t payload_len) {
  w.u16(meta.kind.value)
      .u64(meta.tuple.view)
      .channel(meta.tuple.cq)
      .u64(meta.tuple.cnt)
      .u32(static_cast<std::uint32_t>(payload_len));
}

}  // namespace

Bytes encode_header(const MessageMeta& meta, std::size_t payload_len) {
  ByteWriter w(kEnvelopeHeaderSize);
  write_header(w, meta, payload_len);
  return std::move(w).take();
}

Bytes mac_input(const MessageMeta& meta, std::span<const std::uint8_t> payload) {
  ByteWriter w(kEnvelopeHeaderSize + payload.size());
  write_header(w, meta, payload.size());
  w.raw(payload);
  return std::move(w).take();
}

Bytes canonical_encode(const ShieldedMessage& msg) {
  ByteWriter w(kEnvelopeHeaderSize + msg.payload.size() + kMacSize);
  write_header(w, msg.meta, msg.payload.size());
  w.raw(msg.payload).raw(msg.mac);
  return std::move(w).take();
}

std::optional<ShieldedMessage> canonical_decode(std::span<const std::uint8_t> bytes) {
  try {
    ByteReader r(bytes);
    ShieldedMessage msg;
    msg.meta.kind = MessageKind{r.u16()};
    msg.meta.tuple.view = r.u64();
    msg.meta.tuple.cq = r.channel();
    msg.meta.tuple.cnt = r.u64();
    const auto len = r.u32();
    if (r.remaining() != static_cast<std::size_t>(len) + kMacSize) return std::nullopt;
    msg.payload.resize(len);
    r.raw(msg.payload);
    r.raw(msg.mac);
    r.expect_done();
    return msg;
  } catch (const Error&) {
    return std::nullopt;
  }
}

Digest message_digest(std::span<const std::uint8_t> encoded) { return crypto::sha256(encoded); }

}  // namespace shieldrep

#include "shieldrep/core/request.hpp"

namespace shieldrep {

Bytes encode(const ClientRequest& req) {
  ByteWriter w;
  w.u32(req.client.value)
      .u64(req.request_id)
      .u8(static_cast<std::uint8_t>(req.op))
      .bytes(req.key)
      .bytes(req.value)
      .u64(req.known_view)
      .u8(req.known_leader ? 1 : 0)
      .u32(req.known_leader ? req.known_leader->value : 0);
  return std::move(w).take();
}

ClientRequest decode_request(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  ClientRequest req;
  req.client.value = r.u32();
  req.request_id = r.u64();
  auto op = r.u8();
  if (op != static_cast<std::uint8_t>(OpType::Put) && op != static_cast<std::uint8_t>(OpType::Get)) {
    throw Error(Errc::Malformed, "bad op");
  }
  req.op = static_cast<OpType>(op);
  req.key = r.bytes();
  req.value = r.bytes();
  req.known_view = r.u64();
  auto has_leader = r.u8();
  auto leader = r.u32();
  if (has_leader) req.known_leader = NodeId{leader};
  r.expect_done();
  return req;
}

}  // namespace shieldrep
