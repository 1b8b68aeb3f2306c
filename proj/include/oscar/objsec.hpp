#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oscar/bytes.hpp"
#include "oscar/keys.hpp"
#include "oscar/suites.hpp"

namespace oscar::objsec {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kMaxBody = 65535;
inline constexpr std::size_t kMaxIdBytes = 32;
inline constexpr int kMaxNestingDepth = 4;
// version, kind, suite, id length, key_id, body length.
inline constexpr std::size_t kFixedHeaderBytes = 8;

enum class Kind : std::uint8_t { Signed = 1, Encrypted = 2, Certificate = 3 };

std::string kind_name(Kind k);

struct ObjectHeader {
  std::uint8_t version = kVersion;
  SuiteId suite = kSuiteEd25519AesCcm8;
  std::string sender_id;
  std::uint16_t key_id = 0;
  // Only on Encrypted objects: the CoAP MessageID the content key is salted with.
  std::optional<std::uint16_t> binding_message_id;

  bool operator==(const ObjectHeader&) const = default;
};

struct SecureObject {
  Kind kind = Kind::Signed;
  ObjectHeader header;
  Bytes body;
  Bytes auth;

  bool operator==(const SecureObject&) const = default;
};

struct CertificatePayload {
  std::string subject_id;
  VerifyKey public_key;
  std::vector<std::string> capabilities;
  std::optional<std::string> location;
  std::uint64_t not_before = 0;
  std::uint64_t not_after = 0;

  bool operator==(const CertificatePayload&) const = default;

  bool has_capability(const std::string& cap) const;
  bool valid_at(std::uint64_t t) const { return not_before <= t && t < not_after; }
};

// Wire format, fixed order:
//   version u8 | kind u8 | suite u8 | id_len u8 | id | key_id u16
//   | [binding_message_id u16, Encrypted only] | body_len u16 | body | auth
Bytes encode_object(const SecureObject& obj);
// Header bytes up to (not including) body_len; this is the AEAD associated data.
Bytes encode_header(Kind kind, const ObjectHeader& header);
// Throws Malformed or NestingTooDeep. Signed bodies that are themselves
// encoded objects count towards max_depth.
SecureObject decode_object(ByteView bytes, int max_depth = kMaxNestingDepth);
// Number of object layers reachable through Signed bodies, counting this one;
// 0 if bytes do not decode.
int nesting_depth(ByteView bytes);

SecureObject sign_object(ByteView payload, const SigningKey& key, const std::string& signer_id,
                         std::uint16_t key_id = 0);
bool verify_object(const SecureObject& obj, const VerifyKey& key) noexcept;

SecureObject encrypt_object(ByteView plaintext, const ContentKey& key, const ObjectHeader& header);
// Throws AuthFailure on tag mismatch or when the key was derived for another
// (key_id, message_id, sender) binding.
Bytes decrypt_object(const SecureObject& obj, const ContentKey& key);
std::array<std::uint8_t, 13> aead_nonce(std::uint16_t key_id, const std::string& sender_id,
                                        std::uint16_t message_id);

Bytes encode_certificate_payload(const CertificatePayload& p);
CertificatePayload decode_certificate_payload(ByteView bytes);
SecureObject issue_certificate(const CertificatePayload& payload, const SigningKey& anchor_key,
                               const std::string& issuer_id = "anchor");
CertificatePayload certificate_payload(const SecureObject& cert);

// Key container sharing the object wire layout; kinds 0x10/0x11 never
// appear in SecureObject encodings.
struct KeyFile {
  enum class Type : std::uint8_t { Private = 0x10, Public = 0x11 };
  Type type = Type::Private;
  SuiteId suite = kSuiteEd25519AesCcm8;
  std::string owner_id;
  Bytes key;

  bool operator==(const KeyFile&) const = default;
};

Bytes encode_key_file(const KeyFile& k);
KeyFile decode_key_file(ByteView bytes);

std::string describe(const SecureObject& obj);
std::string describe(const KeyFile& k);

}  // namespace oscar::objsec
