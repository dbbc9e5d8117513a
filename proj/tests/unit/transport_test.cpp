#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "shieldrep/core/error.hpp"
#include "shieldrep/transport/endpoint.hpp"
#include "shieldrep/transport/sim_network.hpp"

namespace shieldrep::transport {
namespace {

constexpr MessageKind kPing{0x100};

struct Link {
  testing::CorePair cores;
  CoreSecurity sa{cores.a};
  CoreSecurity sb{cores.b};
  SimNetwork net;
  std::unique_ptr<Endpoint> a;
  std::unique_ptr<Endpoint> b;
  std::vector<Inbound> got;
  Tick now = 0;

  explicit Link(AdversaryPolicy policy = {}, Tick gst = 0, EndpointConfig cfg = {})
      : net(NetConfig{gst, 4, 11, true}, std::move(policy)) {
    a = create_rpc(NodeId{0}, sa, net, cfg, &cores.trace);
    b = create_rpc(NodeId{1}, sb, net, cfg, &cores.trace);
    b->reg_hdlr(kPing, [this](const Inbound& in) { got.push_back(in); });
  }

  void run(Tick ticks) {
    for (Tick end = now + ticks; now < end; ++now) {
      cores.trace.set_now(now);
      net.advance(now);
      a->poll(now);
      b->poll(now);
    }
  }

  std::size_t rejects(std::string_view reason) const {
    std::size_t n = 0;
    for (const auto& e : cores.trace.events()) n += e.kind == EventKind::Reject && e.reason == reason;
    return n;
  }
};

TEST(Endpoint, DeliversWithinDeltaAfterGst) {
  Link l;
  l.a->send(NodeId{1}, kPing, to_bytes("hello"));
  l.run(5);  // flush at 0, arrival by 0 + delta
  ASSERT_EQ(l.got.size(), 1u);
  EXPECT_EQ(l.got[0].payload, to_bytes("hello"));
  EXPECT_EQ(l.got[0].from, NodeId{0});
}

TEST(Endpoint, HandlerRunsOncePerMessageInOrder) {
  Link l;
  for (int i = 0; i < 50; ++i) l.a->send(NodeId{1}, kPing, to_bytes(std::to_string(i)));
  l.run(200);
  ASSERT_EQ(l.got.size(), 50u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(l.got[i].payload, to_bytes(std::to_string(i)));
}

TEST(Endpoint, LastRegistrationWins) {
  Link l;
  int first = 0, second = 0;
  l.b->reg_hdlr(MessageKind{0x101}, [&](const Inbound&) { ++first; });
  l.b->reg_hdlr(MessageKind{0x101}, [&](const Inbound&) { ++second; });
  l.a->send(NodeId{1}, MessageKind{0x101}, {});
  l.run(10);
  EXPECT_EQ(first, 0);
  EXPECT_EQ(second, 1);
}

TEST(Endpoint, LateRegistrationThrows) {
  Link l;
  l.a->send(NodeId{1}, kPing, {});
  l.run(10);
  try {
    l.b->reg_hdlr(MessageKind{0x102}, [](const Inbound&) {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LateRegistration);
  }
}

TEST(Endpoint, UnknownKindIsRejected) {
  Link l;
  l.a->send(NodeId{1}, MessageKind{0x1ff}, {});
  l.run(10);
  EXPECT_TRUE(l.got.empty());
  EXPECT_GE(l.b->stats().rejected, 1u);
}

TEST(Endpoint, DuplicateAttachThrows) {
  Link l;
  testing::CorePair other;
  CoreSecurity s(other.a);
  try {
    create_rpc(NodeId{0}, s, l.net, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateEndpoint);
  }
}

TEST(Endpoint, WindowLimitsInFlight) {
  EndpointConfig cfg;
  cfg.window = 4;
  Link l({}, 0, cfg);
  for (int i = 0; i < 20; ++i) l.a->send(NodeId{1}, kPing, {});
  l.a->flush(0);
  EXPECT_EQ(l.a->in_flight(NodeId{1}), 4u);
  l.run(200);
  EXPECT_EQ(l.got.size(), 20u);
}

TEST(Endpoint, QueueFullThrows) {
  EndpointConfig cfg;
  cfg.tx_capacity = 2;
  Link l({}, 0, cfg);
  l.a->send(NodeId{1}, kPing, {});
  l.a->send(NodeId{1}, kPing, {});
  try {
    l.a->send(NodeId{1}, kPing, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::QueueFull);
  }
}

TEST(Adversary, TamperNextIsBadMac) {
  AdversaryPolicy p;
  p.scripted.push_back(ScriptedAction{0, ActionType::TamperNext, {}, ChannelId{NodeId{0}, NodeId{1}, 0}});
  Link l(p);
  l.a->send(NodeId{1}, kPing, to_bytes("payload bytes"));
  l.run(200);
  EXPECT_GE(l.rejects("BadMac"), 1u);
  // The retransmission gets through intact.
  ASSERT_EQ(l.got.size(), 1u);
  EXPECT_EQ(l.got[0].payload, to_bytes("payload bytes"));
}

TEST(Adversary, ReplayIsStaleNeverAcceptedTwice) {
  AdversaryPolicy p;
  p.scripted.push_back(
      ScriptedAction{20, ActionType::ReplayCaptured, {}, ChannelId{NodeId{0}, NodeId{1}, 0}, 5});
  Link l(p);
  for (int i = 0; i < 3; ++i) l.a->send(NodeId{1}, kPing, to_bytes(std::to_string(i)));
  l.run(100);
  EXPECT_EQ(l.got.size(), 3u);
  EXPECT_GE(l.rejects("StaleCounter"), 1u);
  std::size_t accepts = 0;
  for (const auto& e : l.cores.trace.events()) accepts += e.kind == EventKind::Accept;
  EXPECT_EQ(accepts, 3u);
}

TEST(Adversary, DropsAreRetransmitted) {
  AdversaryPolicy p;
  p.defaults.drop_prob = 0.5;
  Link l(p, 150);
  for (int i = 0; i < 20; ++i) l.a->send(NodeId{1}, kPing, to_bytes(std::to_string(i)));
  l.run(600);
  ASSERT_EQ(l.got.size(), 20u);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(l.got[i].payload, to_bytes(std::to_string(i)));
  EXPECT_GT(l.net.adversary().stats().dropped, 0u);
  EXPECT_GT(l.a->stats().retransmits, 0u);
}

TEST(Adversary, ReorderIsAbsorbedByCounters) {
  AdversaryPolicy p;
  p.defaults.reorder_window = 8;
  Link l(p, 1000);
  for (int i = 0; i < 30; ++i) l.a->send(NodeId{1}, kPing, to_bytes(std::to_string(i)));
  l.run(400);
  ASSERT_EQ(l.got.size(), 30u);
  for (int i = 0; i < 30; ++i) EXPECT_EQ(l.got[i].payload, to_bytes(std::to_string(i)));
}

TEST(Adversary, PartitionBlocksUntilHeal) {
  AdversaryPolicy p;
  p.scripted.push_back(ScriptedAction{0, ActionType::Partition, {NodeId{0}}});
  p.scripted.push_back(ScriptedAction{50, ActionType::Heal});
  Link l(p);
  l.a->send(NodeId{1}, kPing, {});
  l.run(49);
  EXPECT_TRUE(l.got.empty());
  l.run(100);
  EXPECT_EQ(l.got.size(), 1u);
}

TEST(Adversary, PostGstFramesMeetTheBound) {
  AdversaryPolicy p;
  p.defaults.reorder_window = 8;
  p.defaults.drop_prob = 0.3;
  Adversary adv(p, 100, 4, 3);
  const ChannelId link{NodeId{0}, NodeId{1}, 0};
  for (Tick t = 100; t < 200; ++t) {
    auto out = adv.on_transmit(link, Bytes(64, 1), t);
    ASSERT_FALSE(out.empty());
    for (const auto& e : out) EXPECT_LE(e.deliver_at, t + 4);
  }
}

TEST(Adversary, PlainSecurityKeepsOrderWithoutMacs) {
  PlainSecurity a(NodeId{0}), b(NodeId{1});
  const ChannelId ab{NodeId{0}, NodeId{1}, 0};
  auto m1 = a.shield(to_bytes("1"), ab, kPing);
  auto m2 = a.shield(to_bytes("2"), ab, kPing);
  EXPECT_EQ(m1.mac, Mac{});
  EXPECT_TRUE(std::holds_alternative<tcb::BufferFuture>(b.verify(m2)));
  EXPECT_TRUE(std::holds_alternative<tcb::AcceptNow>(b.verify(m1)));
  EXPECT_EQ(b.drain_ready(ab).size(), 1u);
  EXPECT_TRUE(std::holds_alternative<tcb::Reject>(b.verify(m1)));
}

}  // namespace
}  // namespace shieldrep::transport
