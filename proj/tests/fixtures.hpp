#pragma once

#include <memory>
#include <string>

#include "oscar/keymat.hpp"
#include "oscar/nodes.hpp"

namespace oscar::testing {

// One authority, one producer serving /temp, one authorised consumer.
struct Deployment {
  SigningKey authority = SigningKey::from_seed(to_bytes("authority"));
  SigningKey producer_key = SigningKey::from_seed(to_bytes("producer"));
  objsec::SecureObject certificate;
  keymat::AccessSecret secret;
  std::unique_ptr<nodes::Producer> producer;
  std::unique_ptr<nodes::AuthzServer> as;
  std::unique_ptr<nodes::Consumer> consumer;

  explicit Deployment(std::uint64_t not_after = std::uint64_t{1} << 40,
                      std::string capability = "temperature-sensor", std::uint64_t seed = 1) {
    objsec::CertificatePayload p;
    p.subject_id = "prod-01";
    p.public_key = producer_key.public_key();
    p.capabilities = {std::move(capability)};
    p.not_before = 0;
    p.not_after = not_after;
    certificate = objsec::issue_certificate(p, authority, "authority");
    secret = keymat::make_access_secret(1, Bytes(16, 0x11), {"/temp"}, 1);

    producer = std::make_unique<nodes::Producer>(nodes::ProducerIdentity{"prod-01", producer_key, certificate},
                                                 std::vector<VerifyKey>{authority.public_key()});
    producer->install_secret(secret);
    producer->add_resource("/temp", to_bytes("21.5C"), 0);

    as = std::make_unique<nodes::AuthzServer>(authority);
    as->register_secret(secret);
    as->publish_certificate(certificate, {"/temp"});
    as->register_principal("consumer-1", "pw", {"/temp"});

    consumer = make_consumer("consumer-1", seed);
    consumer->install_grant(as->grant("consumer-1", "pw", "/temp"));
  }

  std::unique_ptr<nodes::Consumer> make_consumer(const std::string& id, std::uint64_t seed) const {
    keymat::TrustStore trust;
    trust.add_anchor(authority.public_key());
    nodes::CapabilityPolicy policy;
    policy.require("/temp", "temperature-sensor");
    return std::make_unique<nodes::Consumer>(id, trust, policy, std::vector<SuiteId>{kSuiteEd25519AesCcm8}, seed);
  }
};

}  // namespace oscar::testing
