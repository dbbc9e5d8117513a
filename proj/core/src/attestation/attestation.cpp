#include "shieldrep/attestation/attestation.hpp"

#include "shieldrep/core/bytes.hpp"
#include "shieldrep/core/crypto.hpp"

namespace shieldrep::attestation {

CodeIdentity genuine_replica_identity() { return {"shieldrep-replica", "0.1.0", "release"}; }

Measurement attest(const CodeIdentity& code) {
  ByteWriter w;
  w.str(code.name).str(code.version).str(code.flags);
  return Measurement{crypto::sha256(w.data())};
}

namespace {

Mac hw_mac(const Measurement& m, const Nonce& nonce, const Key& hw_key) {
  return crypto::hmac_sha256(hw_key, {m.digest, nonce});
}

Mac binding(const Measurement& m, const Nonce& nonce, const Mac& hw_tag, const Key& pub) {
  return crypto::hmac_sha256(pub, {m.digest, nonce, hw_tag});
}

}  // namespace

SignedQuote generate_quote(const Measurement& m, const Key& hw_key, const Key& challenger_pub,
                           const Nonce& nonce) {
  SignedQuote q;
  q.measurement = m;
  q.nonce = nonce;
  q.hw_tag = hw_mac(m, nonce, hw_key);
  q.outer_sig = binding(m, nonce, q.hw_tag, challenger_pub);
  return q;
}

bool verify_hw_tag(const SignedQuote& q, const Key& hw_key) {
  return crypto::tag_equal(hw_mac(q.measurement, q.nonce, hw_key), q.hw_tag);
}

bool verify_binding(const SignedQuote& q, const Key& challenger_pub) {
  return crypto::tag_equal(binding(q.measurement, q.nonce, q.hw_tag, challenger_pub),
                           q.outer_sig);
}

}  // namespace shieldrep::attestation
