#include "oscar/crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>
#include <openssl/rand.h>

#include <memory>

namespace oscar::crypto {

namespace {

struct PkeyFree {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxFree {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherCtxFree {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
struct KdfFree {
  void operator()(EVP_KDF* p) const { EVP_KDF_free(p); }
};
struct KdfCtxFree {
  void operator()(EVP_KDF_CTX* p) const { EVP_KDF_CTX_free(p); }
};

using Pkey = std::unique_ptr<EVP_PKEY, PkeyFree>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxFree>;
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

[[noreturn]] void fail(const char* what) { throw Error(Errc::CryptoFailure, what); }

Pkey ed25519_private(ByteView seed) {
  if (seed.size() != 32) throw Error(Errc::KeyInvalid, "ed25519 seed must be 32 bytes");
  Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()));
  if (!key) throw Error(Errc::KeyInvalid, "ed25519 private key rejected");
  return key;
}

CipherCtx ccm_context(ByteView key, ByteView nonce, std::size_t tag_len, bool encrypt,
                      const std::uint8_t* tag) {
  if (key.size() != kAeadKeyBytes) throw Error(Errc::KeyInvalid, "AES-128 key must be 16 bytes");
  if (nonce.size() != kAeadNonceBytes) fail("CCM nonce must be 13 bytes");
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) fail("EVP_CIPHER_CTX_new");
  if (EVP_CipherInit_ex(ctx.get(), EVP_aes_128_ccm(), nullptr, nullptr, nullptr, encrypt ? 1 : 0) != 1)
    fail("CCM init");
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, static_cast<int>(nonce.size()), nullptr) != 1)
    fail("CCM ivlen");
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, static_cast<int>(tag_len),
                          const_cast<std::uint8_t*>(tag)) != 1)
    fail("CCM taglen");
  if (EVP_CipherInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data(), -1) != 1)
    fail("CCM key");
  return ctx;
}

}  // namespace

Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) fail("RAND_bytes");
  return out;
}

std::array<std::uint8_t, 32> sha256(ByteView data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
    fail("EVP_Digest");
  return out;
}

std::array<std::uint8_t, 32> hmac_sha256(ByteView key, ByteView data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
            out.data(), &len))
    fail("HMAC");
  return out;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length) {
  std::unique_ptr<EVP_KDF, KdfFree> kdf(EVP_KDF_fetch(nullptr, "HKDF", nullptr));
  if (!kdf) fail("EVP_KDF_fetch(HKDF)");
  std::unique_ptr<EVP_KDF_CTX, KdfCtxFree> ctx(EVP_KDF_CTX_new(kdf.get()));
  if (!ctx) fail("EVP_KDF_CTX_new");

  char digest[] = "SHA256";
  OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_KDF_PARAM_DIGEST, digest, 0),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_KEY, const_cast<std::uint8_t*>(ikm.data()),
                                        ikm.size()),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_SALT, const_cast<std::uint8_t*>(salt.data()),
                                        salt.size()),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_INFO, const_cast<std::uint8_t*>(info.data()),
                                        info.size()),
      OSSL_PARAM_construct_end(),
  };
  Bytes out(length);
  if (EVP_KDF_derive(ctx.get(), out.data(), out.size(), params) != 1) fail("EVP_KDF_derive");
  return out;
}

Bytes aes_ccm_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext,
                   std::size_t tag_len) {
  auto ctx = ccm_context(key, nonce, tag_len, true, nullptr);
  int len = 0;
  if (EVP_CipherUpdate(ctx.get(), nullptr, &len, nullptr, static_cast<int>(plaintext.size())) != 1)
    fail("CCM length");
  if (!aad.empty() &&
      EVP_CipherUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
    fail("CCM aad");
  Bytes out(plaintext.size() + tag_len);
  // A null input pointer would be read as a length call; empty messages still need the MAC pass.
  static const std::uint8_t none = 0;
  if (EVP_CipherUpdate(ctx.get(), out.data(), &len, plaintext.empty() ? &none : plaintext.data(),
                       static_cast<int>(plaintext.size())) != 1)
    fail("CCM encrypt");
  if (EVP_CipherFinal_ex(ctx.get(), out.data() + len, &len) != 1) fail("CCM final");
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, static_cast<int>(tag_len),
                          out.data() + plaintext.size()) != 1)
    fail("CCM get tag");
  return out;
}

Bytes aes_ccm_open(ByteView key, ByteView nonce, ByteView aad, ByteView sealed,
                   std::size_t tag_len) {
  if (sealed.size() < tag_len) throw Error(Errc::AuthFailure, "ciphertext shorter than tag");
  const std::size_t ct_len = sealed.size() - tag_len;
  auto ctx = ccm_context(key, nonce, tag_len, false, sealed.data() + ct_len);
  int len = 0;
  if (EVP_CipherUpdate(ctx.get(), nullptr, &len, nullptr, static_cast<int>(ct_len)) != 1)
    fail("CCM length");
  if (!aad.empty() &&
      EVP_CipherUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
    fail("CCM aad");
  Bytes out(ct_len);
  std::uint8_t sink = 0;
  // CCM verifies the tag inside the single update call.
  if (EVP_CipherUpdate(ctx.get(), out.empty() ? &sink : out.data(), &len, sealed.data(), static_cast<int>(ct_len)) != 1)
    throw Error(Errc::AuthFailure, "AEAD tag mismatch");
  return out;
}

Bytes ed25519_public_from_seed(ByteView seed) {
  auto key = ed25519_private(seed);
  Bytes pub(32);
  std::size_t len = pub.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), pub.data(), &len) != 1) fail("raw public key");
  return pub;
}

Bytes ed25519_sign(ByteView seed, ByteView message) {
  auto key = ed25519_private(seed);
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx) fail("EVP_MD_CTX_new");
  if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) fail("sign init");
  Bytes sig(64);
  std::size_t len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1)
    fail("EVP_DigestSign");
  return sig;
}

bool ed25519_verify(ByteView public_key, ByteView message, ByteView signature) noexcept {
  if (public_key.size() != 32 || signature.size() != 64) return false;
  Pkey key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                       public_key.size()));
  if (!key) return false;
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx) return false;
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                          message.size()) == 1;
}

}  // namespace oscar::crypto
