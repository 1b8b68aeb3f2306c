#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oscar/coap.hpp"
#include "oscar/keymat.hpp"
#include "oscar/objsec.hpp"

// Producer (constrained server), consumer (client) and Authorization Server
// roles. Each is a deterministic state machine driven by the caller; none
// owns threads, sockets or clocks.
namespace oscar::nodes {

inline constexpr const char* kSecretResource = "/secret";

// Crypto operations performed so far; harnesses charge CPU time from deltas.
struct OpCounters {
  std::uint64_t signatures = 0;
  std::uint64_t verifications = 0;
  std::uint64_t aead = 0;
  std::uint64_t prf = 0;

  bool operator==(const OpCounters&) const = default;
};

struct ProducerIdentity {
  std::string sender_id;
  SigningKey signing_key;
  objsec::SecureObject certificate;
};

// Offline re-signing load: N resources, each updated every t seconds on
// average, giving a mean re-signing interval beta = t / N.
struct ResignConfig {
  double update_time_s = 60.0;
  std::size_t n_resources = 1;

  double beta_s() const { return update_time_s / static_cast<double>(n_resources); }
  static ResignConfig from_beta(double beta_s, std::size_t n_resources = 1) {
    return ResignConfig{beta_s * static_cast<double>(n_resources), n_resources};
  }
};

struct CachedResource {
  Bytes representation;
  objsec::SecureObject signed_object;
  Bytes encoded;
  double signed_at = 0;
};

class Producer {
 public:
  Producer(ProducerIdentity identity, std::vector<VerifyKey> authority_anchors,
           std::vector<SuiteId> supported_suites = {kSuiteEd25519AesCcm8},
           coap::DuplicateWindow window = coap::DuplicateWindow{});

  void add_resource(const std::string& path, ByteView representation, double now);
  // Re-signs offline; no message is produced. Throws UnknownPath.
  void refresh_resource(const std::string& path, ByteView representation, double now);
  // Configuration-time install; throws AmbiguousScope if scopes would overlap.
  void install_secret(const keymat::AccessSecret& secret);

  coap::Message handle_get(const coap::Message& request, const std::string& peer, double now);
  coap::Message handle_put_secret(const coap::Message& request, const std::string& peer, double now);
  // Dispatches on method and path.
  coap::Message handle(const coap::Message& request, const std::string& peer, double now);

  // Server-initiated Non-confirmable 2.05 bound to message_id.
  coap::Message notification(const std::string& path, std::uint16_t message_id, ByteView token);

  const CachedResource* resource(const std::string& path) const;
  const std::vector<keymat::AccessSecret>& secrets() const { return secrets_; }
  const ProducerIdentity& identity() const { return identity_; }
  const std::vector<SuiteId>& supported_suites() const { return supported_; }
  const OpCounters& counters() const { return counters_; }
  const coap::DuplicateWindow& duplicate_window() const { return window_; }

  // Everything the producer stores, split by whether it scales with peers.
  struct Footprint {
    std::size_t resources = 0;
    std::size_t secrets = 0;
    std::size_t per_peer_contexts = 0;
    std::size_t duplicate_entries = 0;

    bool operator==(const Footprint&) const = default;
  };
  Footprint footprint() const;

 private:
  coap::Message respond_to(const coap::Message& request, coap::Code code);
  coap::Message encrypted_content(const coap::Message& request, const std::string& path,
                                  std::uint16_t binding_message_id, SuiteId suite);
  void resign(CachedResource& entry, ByteView representation, double now);

  ProducerIdentity identity_;
  keymat::TrustStore anchors_;
  std::vector<SuiteId> supported_;
  coap::DuplicateWindow window_;
  std::map<std::string, CachedResource> resources_;
  std::vector<keymat::AccessSecret> secrets_;
  std::uint16_t next_message_id_ = 0;
  OpCounters counters_;
};

// Path-prefix to required certificate capability.
class CapabilityPolicy {
 public:
  void require(std::string prefix, std::string capability);
  // Longest matching prefix wins; nullopt when no rule applies.
  std::optional<std::string> required_for(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> rules_;
};

struct Grant {
  std::vector<keymat::AccessSecret> secrets;
  std::vector<objsec::SecureObject> certificates;
};

class Consumer {
 public:
  using CertificateFetcher = std::function<std::optional<objsec::SecureObject>(const std::string&)>;

  Consumer(std::string id, keymat::TrustStore trust, CapabilityPolicy policy,
           std::vector<SuiteId> suites = {kSuiteEd25519AesCcm8}, std::uint64_t seed = 1);

  void install_grant(const Grant& grant);
  void set_certificate_fetcher(CertificateFetcher fetch) { fetch_ = std::move(fetch); }
  bool holds_secret_for(const std::string& path) const;

  // Confirmable GET with Accept-Cipher. Throws NoSecret before producing anything.
  coap::Message request(const std::string& path);
  coap::Message request(const std::string& path, std::uint16_t message_id);

  // Decrypts (key salted with the originating request's MessageID), opens the
  // nested signed object, checks certificate and capability, returns the
  // inner representation. A failed response leaves the request pending.
  Bytes accept_response(const coap::Message& response, std::uint64_t unix_now);

  void cancel(ByteView token);
  std::size_t pending_count() const { return pending_.size(); }
  std::uint16_t next_message_id() const { return next_message_id_; }
  const keymat::TrustStore& trust() const { return trust_; }
  const std::vector<keymat::AccessSecret>& secrets() const { return secrets_; }
  const OpCounters& counters() const { return counters_; }
  const std::string& id() const { return id_; }

 private:
  struct Pending {
    std::string path;
    std::uint16_t message_id;
  };

  std::string id_;
  keymat::TrustStore trust_;
  CapabilityPolicy policy_;
  std::vector<SuiteId> suites_;
  std::vector<keymat::AccessSecret> secrets_;
  std::map<Bytes, Pending> pending_;
  CertificateFetcher fetch_;
  std::mt19937_64 rng_;
  std::uint16_t next_message_id_ = 0;
  OpCounters counters_;
};

class AuthzServer {
 public:
  AuthzServer(SigningKey authority_key, std::string authority_id = "authority");

  void register_principal(const std::string& principal, const std::string& credential,
                          std::vector<std::string> granted_paths);
  void register_secret(const keymat::AccessSecret& secret);
  // Rotates key_id to new_secret; returns the signed PUT payload for producers.
  objsec::SecureObject rotate(std::uint16_t key_id, ByteView new_secret);
  void publish_certificate(const objsec::SecureObject& cert, std::vector<std::string> paths);

  // Secrets covering path whose whole scope the principal may read, plus the
  // certificates of producers serving it. Throws NotAuthorized.
  Grant grant(const std::string& principal, const std::string& credential,
              const std::string& path) const;
  std::optional<objsec::SecureObject> certificate(const std::string& subject_id) const;

  VerifyKey authority_public_key() const { return authority_key_.public_key(); }
  const std::string& authority_id() const { return authority_id_; }
  const keymat::AccessSecret* secret(std::uint16_t key_id) const;

 private:
  struct Principal {
    std::string credential;
    std::vector<std::string> paths;
  };
  struct Published {
    objsec::SecureObject cert;
    std::vector<std::string> paths;
  };

  SigningKey authority_key_;
  std::string authority_id_;
  std::map<std::string, Principal> principals_;
  std::map<std::uint16_t, keymat::AccessSecret> secrets_;
  std::map<std::string, Published> certificates_;
};

}  // namespace oscar::nodes
