#include <algorithm>

#include "oscar/nodes.hpp"

namespace oscar::nodes {

AuthzServer::AuthzServer(SigningKey authority_key, std::string authority_id)
    : authority_key_(std::move(authority_key)), authority_id_(std::move(authority_id)) {}

void AuthzServer::register_principal(const std::string& principal, const std::string& credential,
                                     std::vector<std::string> granted_paths) {
  principals_[principal] = Principal{credential, std::move(granted_paths)};
}

void AuthzServer::register_secret(const keymat::AccessSecret& secret) {
  auto it = secrets_.find(secret.key_id);
  if (it != secrets_.end() && secret.epoch <= it->second.epoch) return;
  secrets_[secret.key_id] = secret;
  std::vector<keymat::AccessSecret> all;
  for (const auto& [_, s] : secrets_) all.push_back(s);
  keymat::check_scope_partition(all);
}

objsec::SecureObject AuthzServer::rotate(std::uint16_t key_id, ByteView new_secret) {
  auto it = secrets_.find(key_id);
  if (it == secrets_.end()) throw Error(Errc::NoSecret, "unknown key id " + std::to_string(key_id));
  auto signed_update = keymat::rotate_access_secret(it->second, new_secret, authority_key_, authority_id_);
  it->second = keymat::decode_access_secret(signed_update.body);
  return signed_update;
}

void AuthzServer::publish_certificate(const objsec::SecureObject& cert, std::vector<std::string> paths) {
  const auto payload = objsec::certificate_payload(cert);
  certificates_[payload.subject_id] = Published{cert, std::move(paths)};
}

Grant AuthzServer::grant(const std::string& principal, const std::string& credential,
                         const std::string& path) const {
  auto p = principals_.find(principal);
  if (p == principals_.end() || p->second.credential != credential)
    throw Error(Errc::NotAuthorized, "unknown principal or bad credential");
  const auto& allowed = p->second.paths;
  auto permitted = [&](const std::string& x) {
    return std::find(allowed.begin(), allowed.end(), x) != allowed.end();
  };
  if (!permitted(path)) throw Error(Errc::NotAuthorized, path);

  Grant g;
  for (const auto& [_, s] : secrets_) {
    if (!s.covers(path)) continue;
    if (std::all_of(s.resource_scope.begin(), s.resource_scope.end(), permitted)) g.secrets.push_back(s);
  }
  if (g.secrets.empty()) throw Error(Errc::NotAuthorized, "no releasable secret for " + path);
  for (const auto& [_, pub] : certificates_)
    if (std::find(pub.paths.begin(), pub.paths.end(), path) != pub.paths.end())
      g.certificates.push_back(pub.cert);
  return g;
}

std::optional<objsec::SecureObject> AuthzServer::certificate(const std::string& subject_id) const {
  auto it = certificates_.find(subject_id);
  if (it == certificates_.end()) return std::nullopt;
  return it->second.cert;
}

const keymat::AccessSecret* AuthzServer::secret(std::uint16_t key_id) const {
  auto it = secrets_.find(key_id);
  return it == secrets_.end() ? nullptr : &it->second;
}

}  // namespace oscar::nodes
