#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "shieldrep/core/error.hpp"
#include "shieldrep/tracecheck/history.hpp"
#include "shieldrep/tracecheck/properties.hpp"

namespace shieldrep::tracecheck {
namespace {

namespace corpus = testing::corpus;

HistoryOp op(std::uint32_t client, OpType t, std::string_view key, std::string_view value,
             std::uint64_t inv, std::uint64_t resp, bool found = true) {
  HistoryOp h;
  h.client = ClientId{client};
  h.rid = inv + 1;
  h.op = t;
  h.key = to_bytes(key);
  h.value = to_bytes(value);
  h.found = t == OpType::Get && found;
  h.invoke = inv;
  h.response = resp;
  h.completed = true;
  return h;
}

TEST(Corpus, AcceptWithoutSendIsOneOriginViolation) {
  auto v = check_messages(corpus::accept_without_send());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].property, Property::Origin);
  EXPECT_EQ(check_origin(v[0].witness).size(), 1u);
}

TEST(Corpus, SwappedAcceptsIsOneOrderViolation) {
  auto v = check_messages(corpus::swapped_accepts());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].property, Property::Order);
  EXPECT_EQ(check_order(v[0].witness).size(), 1u);
}

TEST(Corpus, DuplicateAcceptIsOneNoDupViolation) {
  auto v = check_messages(corpus::duplicate_accept());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].property, Property::NoDup);
  EXPECT_EQ(check_nodup(v[0].witness).size(), 1u);
}

TEST(Corpus, DivergentCommitsIsOneAgreementViolation) {
  auto v = check_agreement(corpus::divergent_commits(), AgreementMode::TotalOrder);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].property, Property::Agreement);
  EXPECT_EQ(check_agreement(v[0].witness, AgreementMode::TotalOrder).size(), 1u);
  EXPECT_EQ(check_agreement(corpus::divergent_commits(), AgreementMode::PerKey).size(), 1u);
}

TEST(Corpus, RepeatedViewIsOneViolation) {
  EXPECT_EQ(check_view_monotonic(corpus::repeated_view()).size(), 1u);
}

TEST(Corpus, TwoLeaseHoldersIsOneViolation) {
  auto v = check_lease_exclusion(corpus::two_lease_holders());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].property, Property::LeaseExclusion);
}

TEST(Corpus, InterleavedReadsAreNotLinearizable) {
  auto r = check_linearizable(corpus::interleaved_reads());
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.witness.empty());
  EXPECT_FALSE(check_linearizable(r.witness).ok);
}

TEST(Corpus, PlaintextOnWireIsOneLeak) {
  const Bytes secret = to_bytes("sixteen-byte-key");
  Bytes wire = to_bytes("header|");
  wire.insert(wire.end(), secret.begin(), secret.end());
  auto v = check_secrets({wire, wire}, {secret, to_bytes("absent-needle---")});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].property, Property::SecretLeak);
}

TEST(Messages, CrashedNodesAreExcludedFromAgreement) {
  auto t = corpus::divergent_commits();
  auto crash = corpus::ev(2, 2, EventKind::Crash, 1);
  t.push_back(crash);
  EXPECT_TRUE(check_agreement(t, AgreementMode::TotalOrder).empty());
  EXPECT_TRUE(check_agreement(corpus::divergent_commits(), AgreementMode::TotalOrder,
                              {NodeId{1}})
                  .empty());
}

TEST(Messages, UntrustedReceiverIsFlagged) {
  auto t = corpus::swapped_accepts();
  t.erase(t.begin() + 1);  // receiver never trusted
  for (std::size_t i = 0; i < t.size(); ++i) t[i].seq = i;
  auto v = check_origin(t);
  EXPECT_EQ(v.size(), 2u);
}

TEST(Messages, OutOfOrderTraceIsMalformed) {
  auto t = corpus::swapped_accepts();
  std::swap(t[0], t[3]);
  try {
    check_messages(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedTrace);
  }
}

TEST(Messages, CheckersArePure) {
  const auto t = corpus::swapped_accepts();
  auto a = check_messages(t);
  auto b = check_messages(t);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a[0].witness, b[0].witness);
}

TEST(Linearizable, EmptyHistory) {
  auto r = check_linearizable({});
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.order.empty());
}

TEST(Linearizable, RealTimeOrderForcesValue) {
  EXPECT_TRUE(check_linearizable({op(1, OpType::Put, "x", "1", 0, 1),
                                  op(2, OpType::Get, "x", "1", 2, 3)})
                  .ok);
  EXPECT_FALSE(check_linearizable({op(1, OpType::Put, "x", "1", 0, 1),
                                   op(2, OpType::Get, "x", "", 2, 3, false)})
                   .ok);
}

TEST(Linearizable, ConcurrentReadMaySeeEither) {
  for (auto v : {"0", "1"}) {
    EXPECT_TRUE(check_linearizable({op(1, OpType::Put, "x", "0", 0, 1),
                                    op(1, OpType::Put, "x", "1", 2, 5),
                                    op(2, OpType::Get, "x", v, 3, 4)})
                    .ok)
        << v;
  }
}

TEST(Linearizable, PendingPutMayTakeEffect) {
  auto pending = op(1, OpType::Put, "x", "1", 0, 0);
  pending.completed = false;
  EXPECT_TRUE(check_linearizable({pending, op(2, OpType::Get, "x", "1", 5, 6)}).ok);
  EXPECT_TRUE(check_linearizable({pending, op(2, OpType::Get, "x", "", 5, 6, false)}).ok);
}

TEST(Linearizable, KeysAreIndependent) {
  EXPECT_TRUE(check_linearizable({op(1, OpType::Put, "x", "1", 0, 1),
                                  op(1, OpType::Put, "y", "2", 2, 3),
                                  op(2, OpType::Get, "x", "1", 4, 5),
                                  op(2, OpType::Get, "y", "2", 6, 7)})
                  .ok);
}

TEST(Linearizable, WindowTooWideThrows) {
  std::vector<HistoryOp> h;
  for (std::uint32_t i = 0; i < kMaxWindow + 1; ++i) {
    h.push_back(op(i + 1, OpType::Put, "x", std::to_string(i), i, 100 + i));
  }
  try {
    check_linearizable(h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WindowTooWide);
  }
  h.pop_back();
  EXPECT_TRUE(check_linearizable(h).ok);
}

TEST(Sequential, StaleLocalReadIsAllowed) {
  // Not linearizable (the read starts after the write ends) but sequentially consistent.
  std::vector<HistoryOp> h{op(1, OpType::Put, "x", "1", 0, 1),
                           op(2, OpType::Get, "x", "", 2, 3, false)};
  EXPECT_FALSE(check_linearizable(h).ok);
  EXPECT_TRUE(check_sequential(h).ok);
}

TEST(Sequential, ProgramOrderIsRespected) {
  // Client 2 sees 2 then 1, client 3 sees 1 then 2: no single order explains both.
  std::vector<HistoryOp> h{op(1, OpType::Put, "x", "1", 0, 1),  op(4, OpType::Put, "x", "2", 0, 1),
                           op(2, OpType::Get, "x", "2", 2, 3),  op(2, OpType::Get, "x", "1", 4, 5),
                           op(3, OpType::Get, "x", "1", 2, 3),  op(3, OpType::Get, "x", "2", 4, 5)};
  EXPECT_FALSE(check_sequential(h).ok);
  h.pop_back();
  EXPECT_TRUE(check_sequential(h).ok);
}

TEST(Sequential, CommitIndexFastPath) {
  auto w1 = op(1, OpType::Put, "x", "1", 0, 1);
  auto w2 = op(1, OpType::Put, "x", "2", 2, 3);
  w1.commit_index = 1;
  w2.commit_index = 2;
  auto r = check_sequential({w1, w2, op(2, OpType::Get, "x", "2", 0, 1)});
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.order.size(), 3u);
}

}  // namespace
}  // namespace shieldrep::tracecheck
