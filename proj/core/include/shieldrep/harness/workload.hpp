#pragma once

#include <random>
#include <vector>

#include "shieldrep/core/config.hpp"
#include "shieldrep/core/request.hpp"

namespace shieldrep::harness {

struct Operation {
  std::size_t client = 0;  // index into the client pool
  OpType op = OpType::Get;
  Bytes key;
  Bytes value;  // Put only
};

/// YCSB-style Zipfian rank generator over [0, n); rank 0 is the most popular.
class ZipfianGenerator {
 public:
  ZipfianGenerator(std::uint64_t n, double theta);

  std::uint64_t next(std::mt19937_64& rng);
  /// Probability mass of `rank` under the exact distribution.
  double mass(std::uint64_t rank) const;

 private:
  std::uint64_t n_;
  double theta_;
  double alpha_;
  double zetan_;
  double eta_;
  double zeta2_;
};

/// Harmonic-like normalizer: sum_{i=1..n} 1/i^theta.
double zeta(std::uint64_t n, double theta);

/// Canonical key name for a key rank.
Bytes key_name(std::uint64_t rank);

/// Deterministic operation stream; operations are dealt to clients round-robin.
std::vector<Operation> gen_workload(const WorkloadSpec& spec, std::uint64_t seed);

}  // namespace shieldrep::harness
