#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "oscar/bytes.hpp"

namespace oscar {

using SuiteId = std::uint8_t;

inline constexpr SuiteId kSuiteEd25519AesCcm8 = 1;

// One signature algorithm paired with the AEAD and PRF we use alongside it.
class CipherSuite {
 public:
  virtual ~CipherSuite() = default;

  virtual SuiteId id() const = 0;
  virtual std::string name() const = 0;
  virtual std::size_t signature_bytes() const = 0;
  virtual std::size_t tag_bytes() const = 0;
  virtual std::size_t private_key_bytes() const = 0;

  virtual Bytes generate_private_key() const = 0;
  // Throws Errc::KeyInvalid on a malformed private key.
  virtual Bytes public_from_private(ByteView private_key) const = 0;
  virtual Bytes sign(ByteView private_key, ByteView message) const = 0;
  virtual bool verify(ByteView public_key, ByteView message, ByteView signature) const = 0;
};

// Global suite table. Suite 1 is always registered.
const CipherSuite* find_suite(SuiteId id);
const CipherSuite& suite_or_throw(SuiteId id);
std::vector<SuiteId> registered_suites();
void register_suite(std::unique_ptr<CipherSuite> suite);

struct VerifyKey {
  SuiteId suite = kSuiteEd25519AesCcm8;
  Bytes bytes;

  bool operator==(const VerifyKey&) const = default;
};

struct SigningKey {
  SuiteId suite = kSuiteEd25519AesCcm8;
  Bytes bytes;

  static SigningKey generate(SuiteId suite = kSuiteEd25519AesCcm8);
  // Deterministic key from seed material, for reproducible simulations.
  static SigningKey from_seed(ByteView seed, SuiteId suite = kSuiteEd25519AesCcm8);

  VerifyKey public_key() const;

  bool operator==(const SigningKey&) const = default;
};

}  // namespace oscar
