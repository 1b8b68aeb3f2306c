#include "oscar/nodes.hpp"

namespace oscar::nodes {

Producer::Producer(ProducerIdentity identity, std::vector<VerifyKey> authority_anchors,
                   std::vector<SuiteId> supported_suites, coap::DuplicateWindow window)
    : identity_(std::move(identity)), supported_(std::move(supported_suites)), window_(std::move(window)) {
  if (identity_.sender_id.empty()) throw Error(Errc::Malformed, "producer needs a sender id");
  if (supported_.empty()) throw Error(Errc::Malformed, "producer needs at least one suite");
  for (const auto& k : authority_anchors) anchors_.add_anchor(k);
}

void Producer::resign(CachedResource& entry, ByteView representation, double now) {
  entry.representation.assign(representation.begin(), representation.end());
  entry.signed_object = objsec::sign_object(representation, identity_.signing_key, identity_.sender_id);
  entry.encoded = objsec::encode_object(entry.signed_object);
  entry.signed_at = now;
  ++counters_.signatures;
}

void Producer::add_resource(const std::string& path, ByteView representation, double now) {
  resign(resources_[path], representation, now);
}

void Producer::refresh_resource(const std::string& path, ByteView representation, double now) {
  auto it = resources_.find(path);
  if (it == resources_.end()) throw Error(Errc::UnknownPath, path);
  resign(it->second, representation, now);
}

void Producer::install_secret(const keymat::AccessSecret& secret) {
  std::vector<keymat::AccessSecret> next;
  for (const auto& s : secrets_)
    if (s.key_id != secret.key_id) next.push_back(s);
  next.push_back(secret);
  keymat::check_scope_partition(next);
  secrets_ = std::move(next);
}

const CachedResource* Producer::resource(const std::string& path) const {
  auto it = resources_.find(path);
  return it == resources_.end() ? nullptr : &it->second;
}

coap::Message Producer::respond_to(const coap::Message& request, coap::Code code) {
  coap::Message r;
  r.code = code;
  r.token = request.token;
  if (request.type == coap::Type::Confirmable) {
    r.type = coap::Type::Ack;
    r.message_id = request.message_id;
  } else {
    r.type = coap::Type::NonConfirmable;
    r.message_id = next_message_id_++;
  }
  return r;
}

coap::Message Producer::encrypted_content(const coap::Message& request, const std::string& path,
                                          std::uint16_t binding_message_id, SuiteId suite) {
  const auto& secret = keymat::lookup_secret_for_resource(secrets_, path);
  const auto& entry = resources_.at(path);

  const ContentKey key = keymat::derive_content_key(secret, binding_message_id, identity_.sender_id);
  ++counters_.prf;
  objsec::ObjectHeader header;
  header.suite = suite;
  header.sender_id = identity_.sender_id;
  header.key_id = secret.key_id;
  header.binding_message_id = binding_message_id;
  const auto obj = objsec::encrypt_object(entry.encoded, key, header);
  ++counters_.aead;

  coap::Message r = respond_to(request, coap::Code::Content);
  r.payload = objsec::encode_object(obj);
  return r;
}

coap::Message Producer::handle_get(const coap::Message& request, const std::string& peer, double now) {
  // Duplicates get the byte-identical earlier answer; a new key is never derived for a seen MessageID.
  if (window_.check(peer, request.message_id, now)) {
    if (const Bytes* cached = window_.cached_response(peer, request.message_id))
      return coap::decode(*cached);
  }

  auto finish = [&](coap::Message response) {
    window_.attach_response(peer, request.message_id, coap::encode(response));
    return response;
  };

  if (request.code != coap::Code::Get) return finish(respond_to(request, coap::Code::BadRequest));
  if (!coap::unknown_critical_options(request).empty())
    return finish(respond_to(request, coap::Code::BadOption));

  SuiteId suite = supported_.front();
  if (const auto* opt = request.find_option(coap::option::kAcceptCipher)) {
    std::optional<SuiteId> chosen;
    try {
      chosen = coap::negotiate_suite(coap::parse_accept_cipher(*opt), supported_);
    } catch (const Error&) {
      return finish(respond_to(request, coap::Code::BadOption));
    }
    if (!chosen) return finish(respond_to(request, coap::Code::NotAcceptable));
    suite = *chosen;
  }

  const std::string path = request.uri_path();
  if (!resources_.contains(path)) return finish(respond_to(request, coap::Code::NotFound));
  try {
    return finish(encrypted_content(request, path, request.message_id, suite));
  } catch (const Error& e) {
    if (e.code() == Errc::NoSecret || e.code() == Errc::AmbiguousScope)
      return finish(respond_to(request, coap::Code::Unauthorized));
    throw;
  }
}

coap::Message Producer::handle_put_secret(const coap::Message& request, const std::string& peer,
                                          double now) {
  if (window_.check(peer, request.message_id, now)) {
    if (const Bytes* cached = window_.cached_response(peer, request.message_id))
      return coap::decode(*cached);
  }
  auto finish = [&](coap::Code code) {
    coap::Message response = respond_to(request, code);
    window_.attach_response(peer, request.message_id, coap::encode(response));
    return response;
  };

  if (request.code != coap::Code::Put) return finish(coap::Code::BadRequest);

  objsec::SecureObject obj;
  keymat::AccessSecret incoming;
  try {
    obj = objsec::decode_object(request.payload);
    if (obj.kind != objsec::Kind::Signed) return finish(coap::Code::BadRequest);
    ++counters_.verifications;
    if (!anchors_.verified_by_anchor(obj)) return finish(coap::Code::Unauthorized);
    incoming = keymat::decode_access_secret(obj.body);
  } catch (const Error&) {
    return finish(coap::Code::BadRequest);
  }

  for (const auto& s : secrets_) {
    if (s.key_id != incoming.key_id) continue;
    if (incoming.epoch == s.epoch && incoming == s) return finish(coap::Code::Changed);
    if (incoming.epoch <= s.epoch) return finish(coap::Code::Unauthorized);
  }
  try {
    install_secret(incoming);
  } catch (const Error&) {
    return finish(coap::Code::BadRequest);
  }
  return finish(coap::Code::Changed);
}

coap::Message Producer::handle(const coap::Message& request, const std::string& peer, double now) {
  if (request.code == coap::Code::Put && request.uri_path() == kSecretResource)
    return handle_put_secret(request, peer, now);
  return handle_get(request, peer, now);
}

coap::Message Producer::notification(const std::string& path, std::uint16_t message_id,
                                     ByteView token) {
  if (!resources_.contains(path)) throw Error(Errc::UnknownPath, path);
  coap::Message trigger;
  trigger.type = coap::Type::NonConfirmable;
  trigger.token.assign(token.begin(), token.end());
  coap::Message r = encrypted_content(trigger, path, message_id, supported_.front());
  r.message_id = message_id;
  return r;
}

Producer::Footprint Producer::footprint() const {
  return Footprint{resources_.size(), secrets_.size(), 0, window_.entry_count()};
}

}  // namespace oscar::nodes
