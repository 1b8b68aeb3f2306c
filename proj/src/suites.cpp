#include "oscar/suites.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "oscar/crypto.hpp"

namespace oscar {

namespace {

class Ed25519AesCcm8 final : public CipherSuite {
 public:
  SuiteId id() const override { return kSuiteEd25519AesCcm8; }
  std::string name() const override { return "ED25519_AES_128_CCM_8_HKDF_SHA256"; }
  std::size_t signature_bytes() const override { return 64; }
  std::size_t tag_bytes() const override { return 8; }
  std::size_t private_key_bytes() const override { return 32; }

  Bytes generate_private_key() const override { return crypto::random_bytes(32); }
  Bytes public_from_private(ByteView private_key) const override {
    return crypto::ed25519_public_from_seed(private_key);
  }
  Bytes sign(ByteView private_key, ByteView message) const override {
    return crypto::ed25519_sign(private_key, message);
  }
  bool verify(ByteView public_key, ByteView message, ByteView signature) const override {
    return crypto::ed25519_verify(public_key, message, signature);
  }
};

struct Registry {
  std::mutex mu;
  std::map<SuiteId, std::unique_ptr<CipherSuite>> suites;

  Registry() { suites.emplace(kSuiteEd25519AesCcm8, std::make_unique<Ed25519AesCcm8>()); }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

const CipherSuite* find_suite(SuiteId id) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.suites.find(id);
  return it == r.suites.end() ? nullptr : it->second.get();
}

const CipherSuite& suite_or_throw(SuiteId id) {
  if (const auto* s = find_suite(id)) return *s;
  throw Error(Errc::Malformed, "unregistered cipher suite " + std::to_string(id));
}

std::vector<SuiteId> registered_suites() {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  std::vector<SuiteId> ids;
  for (const auto& [id, _] : r.suites) ids.push_back(id);
  return ids;
}

void register_suite(std::unique_ptr<CipherSuite> suite) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  const SuiteId id = suite->id();
  r.suites[id] = std::move(suite);
}

SigningKey SigningKey::generate(SuiteId suite) {
  return SigningKey{suite, suite_or_throw(suite).generate_private_key()};
}

SigningKey SigningKey::from_seed(ByteView seed, SuiteId suite) {
  const auto& s = suite_or_throw(suite);
  auto digest = crypto::sha256(seed);
  Bytes material(digest.begin(), digest.begin() + static_cast<long>(std::min<std::size_t>(
                                                      s.private_key_bytes(), digest.size())));
  return SigningKey{suite, std::move(material)};
}

VerifyKey SigningKey::public_key() const {
  return VerifyKey{suite, suite_or_throw(suite).public_from_private(bytes)};
}

}  // namespace oscar
