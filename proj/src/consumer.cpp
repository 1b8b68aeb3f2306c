#include <algorithm>

#include "oscar/nodes.hpp"

namespace oscar::nodes {

void CapabilityPolicy::require(std::string prefix, std::string capability) {
  rules_.emplace_back(std::move(prefix), std::move(capability));
}

std::optional<std::string> CapabilityPolicy::required_for(const std::string& path) const {
  const std::pair<std::string, std::string>* best = nullptr;
  for (const auto& rule : rules_) {
    if (path.compare(0, rule.first.size(), rule.first) != 0) continue;
    if (!best || rule.first.size() > best->first.size()) best = &rule;
  }
  if (!best) return std::nullopt;
  return best->second;
}

Consumer::Consumer(std::string id, keymat::TrustStore trust, CapabilityPolicy policy,
                   std::vector<SuiteId> suites, std::uint64_t seed)
    : id_(std::move(id)),
      trust_(std::move(trust)),
      policy_(std::move(policy)),
      suites_(std::move(suites)),
      rng_(seed) {
  if (suites_.empty() || suites_.size() > coap::kMaxAcceptedSuites) throw Error(Errc::TooManySuites);
  next_message_id_ = static_cast<std::uint16_t>(rng_());
}

void Consumer::install_grant(const Grant& grant) {
  for (const auto& cert : grant.certificates) trust_.add_certificate(cert);
  for (const auto& s : grant.secrets) {
    auto it = std::find_if(secrets_.begin(), secrets_.end(),
                           [&](const keymat::AccessSecret& held) { return held.key_id == s.key_id; });
    if (it == secrets_.end()) {
      secrets_.push_back(s);
    } else if (s.epoch >= it->epoch) {
      *it = s;
    }
  }
}

bool Consumer::holds_secret_for(const std::string& path) const {
  return std::any_of(secrets_.begin(), secrets_.end(),
                     [&](const keymat::AccessSecret& s) { return s.covers(path); });
}

coap::Message Consumer::request(const std::string& path) {
  coap::Message msg = request(path, next_message_id_);
  return msg;
}

coap::Message Consumer::request(const std::string& path, std::uint16_t message_id) {
  if (!holds_secret_for(path)) throw Error(Errc::NoSecret, path);

  coap::Message msg;
  msg.type = coap::Type::Confirmable;
  msg.code = coap::Code::Get;
  msg.message_id = message_id;
  const std::uint64_t token = rng_();
  for (int i = 0; i < 4; ++i) msg.token.push_back(static_cast<std::uint8_t>(token >> (8 * i)));
  msg.set_uri_path(path);
  msg.options.push_back(coap::make_accept_cipher_option(suites_));
  coap::canonicalize(msg);

  next_message_id_ = static_cast<std::uint16_t>(message_id + 1);
  pending_[msg.token] = Pending{path, message_id};
  return msg;
}

void Consumer::cancel(ByteView token) { pending_.erase(Bytes(token.begin(), token.end())); }

Bytes Consumer::accept_response(const coap::Message& response, std::uint64_t unix_now) {
  auto it = pending_.find(response.token);
  if (it == pending_.end()) throw Error(Errc::Malformed, "response matches no pending request");
  const Pending ctx = it->second;

  switch (response.code) {
    case coap::Code::Content: break;
    case coap::Code::Unauthorized: throw Error(Errc::NotAuthorized, "producer answered 4.01");
    default: throw Error(Errc::Malformed, "unexpected response code " + coap::code_string(response.code));
  }

  const auto outer = objsec::decode_object(response.payload);
  if (outer.kind != objsec::Kind::Encrypted) throw Error(Errc::Malformed, "response is not encrypted");

  const keymat::AccessSecret* secret = nullptr;
  for (const auto& s : secrets_)
    if (s.key_id == outer.header.key_id && s.covers(ctx.path)) secret = &s;
  if (!secret) throw Error(Errc::NoSecret, ctx.path);

  // Salted with the MessageID we sent, not whatever the response header claims.
  const ContentKey key = keymat::derive_content_key(*secret, ctx.message_id, outer.header.sender_id);
  ++counters_.prf;
  ++counters_.aead;
  const Bytes plaintext = objsec::decrypt_object(outer, key);

  const auto inner = objsec::decode_object(plaintext, objsec::kMaxNestingDepth - 1);
  if (inner.kind != objsec::Kind::Signed) throw Error(Errc::Malformed, "nested object is not signed");
  if (inner.header.sender_id != outer.header.sender_id)
    throw Error(Errc::UnknownSigner, "signer differs from sender");

  const objsec::SecureObject* cert = trust_.find_certificate(inner.header.sender_id);
  if (!cert && fetch_) {
    if (auto fetched = fetch_(inner.header.sender_id)) {
      trust_.add_certificate(*fetched);
      cert = trust_.find_certificate(inner.header.sender_id);
    }
  }
  if (!cert) throw Error(Errc::UnknownSigner, inner.header.sender_id);
  const auto payload = objsec::certificate_payload(*cert);

  ++counters_.verifications;
  if (!objsec::verify_object(inner, payload.public_key))
    throw Error(Errc::AuthFailure, "content signature does not verify");
  if (!payload.valid_at(unix_now)) throw Error(Errc::CertificateExpired, payload.subject_id);
  if (auto needed = policy_.required_for(ctx.path); needed && !payload.has_capability(*needed))
    throw Error(Errc::CapabilityMismatch, *needed);

  pending_.erase(it);
  return inner.body;
}

}  // namespace oscar::nodes
