#include "oscar/keymat.hpp"

#include <algorithm>
#include <set>

#include "oscar/crypto.hpp"

namespace oscar::keymat {

bool AccessSecret::covers(const std::string& path) const {
  return std::find(resource_scope.begin(), resource_scope.end(), path) != resource_scope.end();
}

AccessSecret make_access_secret(std::uint16_t key_id, Bytes secret,
                                std::vector<std::string> scope, std::uint64_t epoch) {
  if (secret.size() < kMinSecretBytes || secret.size() > kMaxSecretBytes)
    throw Error(Errc::KeyInvalid, "access secret must be 16..32 bytes");
  return AccessSecret{key_id, std::move(secret), std::move(scope), epoch};
}

ContentKey derive_content_key(const AccessSecret& s, std::uint16_t message_id,
                              const std::string& sender_id) {
  if (sender_id.empty()) throw Error(Errc::Malformed, "sender id must be non-empty");
  ByteWriter info;
  info.u16(message_id);
  info.raw(sender_id);
  const Bytes okm = crypto::hkdf_sha256(s.secret, {}, info.bytes(), 16);
  ContentKey key;
  std::copy(okm.begin(), okm.end(), key.bytes.begin());
  key.key_id = s.key_id;
  key.message_id = message_id;
  key.sender_id = sender_id;
  return key;
}

Bytes encode_access_secret(const AccessSecret& s) {
  if (s.secret.size() < kMinSecretBytes || s.secret.size() > kMaxSecretBytes)
    throw Error(Errc::KeyInvalid, "access secret must be 16..32 bytes");
  if (s.resource_scope.size() > 255) throw Error(Errc::Malformed, "scope too large");
  ByteWriter w;
  w.u16(s.key_id);
  w.u64(s.epoch);
  w.u8(static_cast<std::uint8_t>(s.secret.size()));
  w.raw(s.secret);
  w.u8(static_cast<std::uint8_t>(s.resource_scope.size()));
  for (const auto& p : s.resource_scope) {
    if (p.size() > 255) throw Error(Errc::Malformed, "resource path too long");
    w.u8(static_cast<std::uint8_t>(p.size()));
    w.raw(p);
  }
  return std::move(w).take();
}

AccessSecret decode_access_secret(ByteView bytes) {
  ByteReader r(bytes);
  AccessSecret s;
  s.key_id = r.u16();
  s.epoch = r.u64();
  auto secret = r.take(r.u8());
  s.secret.assign(secret.begin(), secret.end());
  const std::size_t n = r.u8();
  for (std::size_t i = 0; i < n; ++i) s.resource_scope.push_back(to_string(r.take(r.u8())));
  if (!r.empty()) throw Error(Errc::Malformed, "trailing bytes in access secret");
  if (s.secret.size() < kMinSecretBytes || s.secret.size() > kMaxSecretBytes)
    throw Error(Errc::Malformed, "access secret length out of range");
  return s;
}

objsec::SecureObject issue_access_secret(const AccessSecret& s, const SigningKey& authority_key,
                                         const std::string& authority_id) {
  return objsec::sign_object(encode_access_secret(s), authority_key, authority_id, s.key_id);
}

objsec::SecureObject rotate_access_secret(const AccessSecret& old, ByteView new_secret,
                                          const SigningKey& authority_key,
                                          const std::string& authority_id) {
  AccessSecret next = make_access_secret(old.key_id, Bytes(new_secret.begin(), new_secret.end()),
                                         old.resource_scope, old.epoch + 1);
  return issue_access_secret(next, authority_key, authority_id);
}

const AccessSecret& lookup_secret_for_resource(std::span<const AccessSecret> store,
                                               const std::string& path) {
  const AccessSecret* found = nullptr;
  for (const auto& s : store) {
    if (!s.covers(path)) continue;
    if (found) throw Error(Errc::AmbiguousScope, path);
    found = &s;
  }
  if (!found) throw Error(Errc::NoSecret, path);
  return *found;
}

void check_scope_partition(std::span<const AccessSecret> store) {
  std::set<std::string> seen;
  for (const auto& s : store)
    for (const auto& p : s.resource_scope)
      if (!seen.insert(p).second) throw Error(Errc::AmbiguousScope, p);
}

void TrustStore::add_anchor(const VerifyKey& key) {
  if (!is_anchor(key)) anchors_.push_back(key);
}

bool TrustStore::is_anchor(const VerifyKey& key) const {
  return std::find(anchors_.begin(), anchors_.end(), key) != anchors_.end();
}

bool TrustStore::verified_by_anchor(const objsec::SecureObject& obj) const {
  return std::any_of(anchors_.begin(), anchors_.end(),
                     [&](const VerifyKey& k) { return objsec::verify_object(obj, k); });
}

void TrustStore::add_certificate(const objsec::SecureObject& cert) {
  if (cert.kind != objsec::Kind::Certificate) throw Error(Errc::Malformed, "not a certificate");
  if (!verified_by_anchor(cert)) throw Error(Errc::UnknownSigner, "certificate not issued by an anchor");
  const auto payload = objsec::certificate_payload(cert);
  certificates_[payload.subject_id] = cert;
}

const objsec::SecureObject* TrustStore::find_certificate(const std::string& subject_id) const {
  auto it = certificates_.find(subject_id);
  return it == certificates_.end() ? nullptr : &it->second;
}

}  // namespace oscar::keymat
