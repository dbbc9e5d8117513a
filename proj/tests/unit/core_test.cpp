#include <gtest/gtest.h>

#include <sstream>

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/config.hpp"
#include "shieldrep/core/crypto.hpp"
#include "shieldrep/core/error.hpp"
#include "shieldrep/core/message.hpp"
#include "shieldrep/core/quorum.hpp"
#include "shieldrep/core/request.hpp"
#include "shieldrep/core/trace.hpp"

namespace shieldrep {
namespace {

ShieldedMessage sample(std::size_t payload_len) {
  ShieldedMessage m;
  m.meta.kind = MessageKind{0x202};
  m.meta.tuple = SequenceTuple{3, ChannelId{NodeId{1}, NodeId{2}, 0}, 42};
  m.payload.assign(payload_len, 0xab);
  m.mac.fill(0x5c);
  return m;
}

TEST(Encoding, RoundTrip) {
  const auto m = sample(17);
  const auto bytes = canonical_encode(m);
  auto back = canonical_decode(bytes);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, m);
}

TEST(Encoding, EqualMessagesEncodeIdentically) {
  EXPECT_EQ(canonical_encode(sample(9)), canonical_encode(sample(9)));
}

TEST(Encoding, Payload256Is320Bytes) {
  // 32-byte header, 256-byte payload, 32-byte tag.
  EXPECT_EQ(canonical_encode(sample(256)).size(), 320u);
  EXPECT_EQ(kEnvelopeHeaderSize, 32u);
}

TEST(Encoding, RejectsTruncatedAndTrailing) {
  auto bytes = canonical_encode(sample(8));
  auto shorter = bytes;
  shorter.pop_back();
  EXPECT_FALSE(canonical_decode(shorter).has_value());
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_FALSE(canonical_decode(longer).has_value());
  EXPECT_FALSE(canonical_decode(Bytes{}).has_value());
}

TEST(Encoding, HeaderIsLittleEndian) {
  const auto h = encode_header(sample(0).meta, 0);
  ASSERT_EQ(h.size(), kEnvelopeHeaderSize);
  EXPECT_EQ(h[0], 0x02);
  EXPECT_EQ(h[1], 0x02);
  EXPECT_EQ(h[2], 3);  // view
  EXPECT_EQ(h[10], 1);  // sender
  EXPECT_EQ(h[14], 2);  // receiver
  EXPECT_EQ(h[20], 42);  // cnt
}

TEST(Quorum, Sizes) {
  EXPECT_EQ(quorum_size(3, 1), 2u);
  EXPECT_EQ(quorum_size(5, 2), 3u);
  EXPECT_EQ(quorum_size(5, 1), 4u);
  EXPECT_THROW(quorum_size(2, 1), Error);
  EXPECT_EQ(max_faults(3), 1u);
  EXPECT_EQ(max_faults(5), 2u);
  EXPECT_EQ(max_faults(4), 1u);
}

TEST(Request, RoundTrip) {
  ClientRequest r;
  r.client = ClientId{7};
  r.request_id = 99;
  r.op = OpType::Put;
  r.key = to_bytes("k");
  r.value = to_bytes("value");
  r.known_view = 4;
  r.known_leader = NodeId{2};
  EXPECT_EQ(decode_request(encode(r)), r);
  auto bad = encode(r);
  bad.resize(bad.size() - 1);
  EXPECT_THROW(decode_request(bad), Error);
}

TEST(Bytes, HexRoundTrip) {
  const Bytes b{0x00, 0x7f, 0xff};
  EXPECT_EQ(to_hex(b), "007fff");
  EXPECT_EQ(from_hex("007fff"), b);
}

TEST(Crypto, KnownSha256) {
  EXPECT_EQ(to_hex(crypto::sha256(to_bytes("abc"))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Crypto, AeadDetectsTamper) {
  Key k{};
  k[0] = 1;
  const auto nonce = crypto::nonce_from_counter(1, 2);
  const auto aad = to_bytes("hdr");
  auto sealed = crypto::aead_seal(k, nonce, to_bytes("secret"), aad);
  EXPECT_EQ(sealed.size(), 6 + crypto::kGcmTagSize);
  EXPECT_EQ(crypto::aead_open(k, nonce, sealed, aad), to_bytes("secret"));
  sealed[0] ^= 1;
  EXPECT_FALSE(crypto::aead_open(k, nonce, sealed, aad).has_value());
}

TEST(Trace, TimestampsNeverDecrease) {
  Trace t;
  t.set_now(5);
  t.trusted(NodeId{0});
  t.set_now(3);
  t.crash(NodeId{0});
  ASSERT_EQ(t.size(), 2u);
  EXPECT_LE(t.events()[0].at, t.events()[1].at);
  EXPECT_LT(t.events()[0].seq, t.events()[1].seq);
}

TEST(Trace, JsonRoundTrip) {
  Trace t;
  t.set_now(1);
  t.trusted(NodeId{0});
  t.send(NodeId{0}, Digest{}, ChannelId{NodeId{0}, NodeId{1}, 0}, 1, 1);
  t.commit(NodeId{1}, ClientId{3}, 4, to_bytes("key"), Digest{}, 9, 2);
  t.reject(NodeId{1}, "BadMac");
  t.view_change(NodeId{1}, 5);
  std::stringstream ss;
  write_trace(ss, t.events());
  EXPECT_EQ(read_trace(ss), t.events());
}

TEST(Trace, MalformedLineThrows) {
  std::stringstream ss("{\"at\": \n");
  EXPECT_THROW(read_trace(ss), Error);
}

TEST(Config, Validation) {
  ScenarioConfig c;
  EXPECT_NO_THROW(validate(c));
  c.n = 2;
  EXPECT_THROW(validate(c), Error);
  c.n = 3;
  c.delta = 0;
  EXPECT_THROW(validate(c), Error);
  c.delta = 4;
  c.workload.read_ratio = 1.5;
  EXPECT_THROW(validate(c), Error);
}

TEST(Config, ProtocolNames) {
  EXPECT_EQ(protocol_from_string("R-Raft"), Protocol::Raft);
  EXPECT_EQ(protocol_from_string("r-allconcur"), Protocol::AllConcur);
  EXPECT_FALSE(protocol_from_string("pbft").has_value());
  for (auto p : {Protocol::Abd, Protocol::Raft, Protocol::Chain, Protocol::AllConcur}) {
    EXPECT_EQ(protocol_from_string(to_string(p)), p);
  }
}

TEST(Config, TimingKeepsElectionPastGranterExpiry) {
  for (Tick d : {1, 4, 10}) {
    const auto t = derive_timing(d);
    EXPECT_GT(t.election_timeout, t.lease_duration + t.lease_slack);
    EXPECT_EQ(t.lease_slack, d);
  }
}

}  // namespace
}  // namespace shieldrep
