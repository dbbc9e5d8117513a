#include "shieldrep/harness/workload.hpp"

#include <cmath>
#include <cstdio>

#include "shieldrep/core/bytes.hpp"

namespace shieldrep::harness {

double zeta(std::uint64_t n, double theta) {
  double sum = 0.0;
  for (std::uint64_t i = 1; i <= n; ++i) sum += 1.0 / std::pow(static_cast<double>(i), theta);
  return sum;
}

ZipfianGenerator::ZipfianGenerator(std::uint64_t n, double theta)
    : n_(n), theta_(theta), alpha_(1.0 / (1.0 - theta)), zetan_(zeta(n, theta)),
      zeta2_(zeta(2, theta)) {
  eta_ = (1.0 - std::pow(2.0 / static_cast<double>(n_), 1.0 - theta_)) / (1.0 - zeta2_ / zetan_);
}

std::uint64_t ZipfianGenerator::next(std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double uz = u * zetan_;
  if (uz < 1.0) return 0;
  if (uz < 1.0 + std::pow(0.5, theta_)) return n_ > 1 ? 1 : 0;
  const auto r = static_cast<std::uint64_t>(static_cast<double>(n_) *
                                            std::pow(eta_ * u - eta_ + 1.0, alpha_));
  return std::min(r, n_ - 1);
}

double ZipfianGenerator::mass(std::uint64_t rank) const {
  return 1.0 / std::pow(static_cast<double>(rank + 1), theta_) / zetan_;
}

Bytes key_name(std::uint64_t rank) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "user%010llu", static_cast<unsigned long long>(rank));
  return to_bytes(buf);
}

std::vector<Operation> gen_workload(const WorkloadSpec& spec, std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> uni(0, spec.key_count - 1);
  std::uniform_int_distribution<int> byte(0, 255);
  std::optional<ZipfianGenerator> zipf;
  if (spec.distribution == KeyDistribution::Zipfian) zipf.emplace(spec.key_count, spec.zipf_theta);

  std::vector<Operation> ops;
  ops.reserve(spec.op_count);
  for (std::size_t i = 0; i < spec.op_count; ++i) {
    Operation o;
    o.client = i % spec.client_count;
    o.op = coin(rng) < spec.read_ratio ? OpType::Get : OpType::Put;
    o.key = key_name(zipf ? zipf->next(rng) : uni(rng));
    if (o.op == OpType::Put) {
      o.value.resize(spec.value_size);
      for (auto& b : o.value) b = static_cast<std::uint8_t>(byte(rng));
    }
    ops.push_back(std::move(o));
  }
  return ops;
}

}  // namespace shieldrep::harness
