#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oscar/keys.hpp"
#include "oscar/objsec.hpp"

namespace oscar::keymat {

inline constexpr std::size_t kMinSecretBytes = 16;
inline constexpr std::size_t kMaxSecretBytes = 32;

struct AccessSecret {
  std::uint16_t key_id = 0;
  Bytes secret;
  std::vector<std::string> resource_scope;
  std::uint64_t epoch = 0;

  bool operator==(const AccessSecret&) const = default;

  bool covers(const std::string& path) const;
};

// Validates the secret length; throws KeyInvalid.
AccessSecret make_access_secret(std::uint16_t key_id, Bytes secret,
                                std::vector<std::string> scope, std::uint64_t epoch = 0);

// k = HKDF-SHA256(ikm = secret, salt = "", info = message_id(be16) || sender_id), 16 bytes.
ContentKey derive_content_key(const AccessSecret& s, std::uint16_t message_id,
                              const std::string& sender_id);

Bytes encode_access_secret(const AccessSecret& s);
AccessSecret decode_access_secret(ByteView bytes);

// New secret under the same key_id and scope, epoch + 1, signed by the
// authority. The result is the PUT payload for the producer's secret resource.
objsec::SecureObject rotate_access_secret(const AccessSecret& old, ByteView new_secret,
                                          const SigningKey& authority_key,
                                          const std::string& authority_id = "authority");
// Same, for an arbitrary secret (first issuance).
objsec::SecureObject issue_access_secret(const AccessSecret& s, const SigningKey& authority_key,
                                         const std::string& authority_id = "authority");

// Throws NoSecret or AmbiguousScope.
const AccessSecret& lookup_secret_for_resource(std::span<const AccessSecret> store,
                                               const std::string& path);
// Throws AmbiguousScope if any path is covered by two secrets with different key ids.
void check_scope_partition(std::span<const AccessSecret> store);

class TrustStore {
 public:
  void add_anchor(const VerifyKey& key);
  bool is_anchor(const VerifyKey& key) const;
  const std::vector<VerifyKey>& anchors() const { return anchors_; }

  // True iff obj is Signed or Certificate and verifies under some anchor.
  bool verified_by_anchor(const objsec::SecureObject& obj) const;

  // Throws UnknownSigner unless the certificate verifies under an anchor.
  void add_certificate(const objsec::SecureObject& cert);
  const objsec::SecureObject* find_certificate(const std::string& subject_id) const;
  std::size_t certificate_count() const { return certificates_.size(); }

 private:
  std::vector<VerifyKey> anchors_;
  std::map<std::string, objsec::SecureObject> certificates_;
};

}  // namespace oscar::keymat
