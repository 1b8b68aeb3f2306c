#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "oscar/bytes.hpp"

// Thin wrappers over OpenSSL primitives. Everything here is stateless.
namespace oscar::crypto {

inline constexpr std::size_t kAeadKeyBytes = 16;
inline constexpr std::size_t kAeadNonceBytes = 13;

Bytes random_bytes(std::size_t n);

std::array<std::uint8_t, 32> sha256(ByteView data);
std::array<std::uint8_t, 32> hmac_sha256(ByteView key, ByteView data);

// RFC 5869 extract-then-expand with SHA-256.
Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length);

// AES-128-CCM. Returns ciphertext || tag.
Bytes aes_ccm_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext,
                   std::size_t tag_len);
// Throws Errc::AuthFailure when the tag does not verify.
Bytes aes_ccm_open(ByteView key, ByteView nonce, ByteView aad, ByteView sealed,
                   std::size_t tag_len);

Bytes ed25519_public_from_seed(ByteView seed);
Bytes ed25519_sign(ByteView seed, ByteView message);
bool ed25519_verify(ByteView public_key, ByteView message, ByteView signature) noexcept;

}  // namespace oscar::crypto
