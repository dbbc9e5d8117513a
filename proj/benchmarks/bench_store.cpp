#include <benchmark/benchmark.h>

#include <string>

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/crypto.hpp"
#include "shieldrep/kvstore/store.hpp"

namespace {

using namespace shieldrep;

std::optional<Key> cipher(bool confidential) {
  if (!confidential) return std::nullopt;
  return crypto::derive_key(Key{}, "bench-store", {});
}

void BM_StoreWrite(benchmark::State& state) {
  kvstore::Store s(1024, cipher(state.range(1) != 0));
  const Bytes value(static_cast<std::size_t>(state.range(0)), 7);
  std::uint64_t ts = 0;
  for (auto _ : state) {
    const auto key = to_bytes("k" + std::to_string(ts % 1024));
    s.write(key, value, {++ts, NodeId{0}});
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_StoreWrite)->ArgsProduct({{32, 256, 4096}, {0, 1}});

void BM_StoreGet(benchmark::State& state) {
  kvstore::Store s(1024, cipher(state.range(1) != 0));
  const Bytes value(static_cast<std::size_t>(state.range(0)), 7);
  std::vector<Bytes> keys;
  for (std::uint64_t i = 0; i < 1024; ++i) {
    keys.push_back(to_bytes("k" + std::to_string(i)));
    s.write(keys.back(), value, {i + 1, NodeId{0}});
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s.get(keys[i++ % keys.size()]));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_StoreGet)->ArgsProduct({{32, 256, 4096}, {0, 1}});

}  // namespace
