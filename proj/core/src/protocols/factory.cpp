#include "shieldrep/core/error.hpp"
#include "shieldrep/protocols/abd.hpp"
#include "shieldrep/protocols/allconcur.hpp"
#include "shieldrep/protocols/chain.hpp"
#include "shieldrep/protocols/raft.hpp"

namespace shieldrep::protocols {

std::unique_ptr<Replica> make_replica(const attestation::ProvisionBundle& bundle, ReplicaEnv env) {
  switch (env.options.protocol) {
    case Protocol::Raft: return std::make_unique<RaftReplica>(bundle, std::move(env));
    case Protocol::Abd: return std::make_unique<AbdReplica>(bundle, std::move(env));
    case Protocol::Chain: return std::make_unique<ChainReplica>(bundle, std::move(env));
    case Protocol::AllConcur: return std::make_unique<AllConcurReplica>(bundle, std::move(env));
  }
  throw Error(Errc::InvalidConfig, "unknown protocol");
}

}  // namespace shieldrep::protocols
