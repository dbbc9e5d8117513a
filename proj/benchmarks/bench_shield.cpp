#include <benchmark/benchmark.h>

#include "shieldrep/core/crypto.hpp"
#include "shieldrep/core/message.hpp"
#include "shieldrep/tcb/trusted_core.hpp"

namespace {

using namespace shieldrep;

struct Pair {
  tcb::TrustedCore a;
  tcb::TrustedCore b;
  ChannelId ab{NodeId{0}, NodeId{1}, 0};

  explicit Pair(bool confidential)
      : a(NodeId{0}, tcb::CoreOptions{confidential, 1024, 4}),
        b(NodeId{1}, tcb::CoreOptions{confidential, 1024, 4}) {
    const tcb::ChannelKeys keys{crypto::derive_key(Key{}, "bench-mac", {}),
                                crypto::derive_key(Key{}, "bench-enc", {})};
    for (auto* c : {&a, &b}) {
      c->install_channel(ab, keys);
      c->mark_trusted();
    }
  }
};

void BM_Shield(benchmark::State& state) {
  Pair p(state.range(1) != 0);
  const Bytes payload(static_cast<std::size_t>(state.range(0)), 0x5a);
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.a.shield_request(payload, p.ab, MessageKind{0x100}));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Shield)->ArgsProduct({{64, 256, 4096}, {0, 1}});

void BM_ShieldVerify(benchmark::State& state) {
  Pair p(state.range(1) != 0);
  const Bytes payload(static_cast<std::size_t>(state.range(0)), 0x5a);
  for (auto _ : state) {
    auto msg = p.a.shield_request(payload, p.ab, MessageKind{0x100});
    benchmark::DoNotOptimize(p.b.verify_request(msg));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_ShieldVerify)->ArgsProduct({{64, 256, 4096}, {0, 1}});

void BM_VerifyFrame(benchmark::State& state) {
  Pair p(false);
  const Bytes payload(256, 0x5a);
  for (auto _ : state) {
    state.PauseTiming();
    auto wire = canonical_encode(p.a.shield_request(payload, p.ab, MessageKind{0x100}));
    state.ResumeTiming();
    benchmark::DoNotOptimize(p.b.verify_frame(wire));
  }
}
BENCHMARK(BM_VerifyFrame);

void BM_Encode(benchmark::State& state) {
  Pair p(false);
  const auto msg = p.a.shield_request(Bytes(256, 1), p.ab, MessageKind{0x100});
  for (auto _ : state) benchmark::DoNotOptimize(canonical_encode(msg));
}
BENCHMARK(BM_Encode);

void BM_Decode(benchmark::State& state) {
  Pair p(false);
  const auto wire = canonical_encode(p.a.shield_request(Bytes(256, 1), p.ab, MessageKind{0x100}));
  for (auto _ : state) benchmark::DoNotOptimize(canonical_decode(wire));
}
BENCHMARK(BM_Decode);

}  // namespace
