#include <doctest.h>

#include "fixtures.hpp"
#include "oscar/error.hpp"

using namespace oscar;
using namespace oscar::nodes;
using oscar::testing::Deployment;

namespace {

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::CryptoFailure;
}

coap::Message get(const std::string& path, std::uint16_t mid) {
  coap::Message m;
  m.code = coap::Code::Get;
  m.message_id = mid;
  m.token = {1, 2};
  m.set_uri_path(path);
  return m;
}

coap::Message put_secret(const objsec::SecureObject& update, std::uint16_t mid) {
  coap::Message m;
  m.code = coap::Code::Put;
  m.message_id = mid;
  m.set_uri_path(kSecretResource);
  m.payload = objsec::encode_object(update);
  return m;
}

}  // namespace

TEST_SUITE("nodes") {

TEST_CASE("end-to-end GET") {
  Deployment d;
  const auto req = d.consumer->request("/temp");
  CHECK(req.type == coap::Type::Confirmable);
  CHECK(req.find_option(coap::option::kAcceptCipher));
  const auto resp = d.producer->handle(req, "c1", 1.0);
  CHECK(resp.code == coap::Code::Content);
  CHECK(resp.type == coap::Type::Ack);
  CHECK(resp.message_id == req.message_id);
  CHECK(resp.token == req.token);
  CHECK(to_string(d.consumer->accept_response(resp, 5)) == "21.5C");
  CHECK(d.consumer->pending_count() == 0);
  // The response path never signs.
  CHECK(d.producer->counters().signatures == 1);
  CHECK(d.producer->counters().aead == 1);
  CHECK(d.consumer->counters().verifications == 1);
}

TEST_CASE("producer state does not grow with peers") {
  Deployment d;
  for (int i = 0; i < 10; ++i) {
    auto c = d.make_consumer("c" + std::to_string(i), 100 + static_cast<std::uint64_t>(i));
    c->install_grant(d.as->grant("consumer-1", "pw", "/temp"));
    const auto req = c->request("/temp");
    CHECK(to_string(c->accept_response(d.producer->handle(req, "peer" + std::to_string(i), 1.0), 5)) == "21.5C");
  }
  const auto f = d.producer->footprint();
  CHECK(f.per_peer_contexts == 0);
  CHECK(f.resources == 1);
  CHECK(f.secrets == 1);
}

TEST_CASE("status codes") {
  Deployment d;
  CHECK(d.producer->handle(get("/missing", 1), "p", 0).code == coap::Code::NotFound);

  auto unacceptable = get("/temp", 2);
  unacceptable.options.push_back(coap::make_accept_cipher_option({42}));
  CHECK(d.producer->handle(unacceptable, "p", 0).code == coap::Code::NotAcceptable);

  auto critical = get("/temp", 3);
  critical.options.push_back(coap::Option{9, {}});
  CHECK(d.producer->handle(critical, "p", 0).code == coap::Code::BadOption);

  d.producer->add_resource("/humidity", to_bytes("40%"), 0);
  CHECK(d.producer->handle(get("/humidity", 4), "p", 0).code == coap::Code::Unauthorized);

  // Without Accept-Cipher the first supported suite is used.
  CHECK(d.producer->handle(get("/temp", 5), "p", 0).code == coap::Code::Content);
  // Non-confirmable requests get a fresh MessageID.
  auto non = get("/temp", 6);
  non.type = coap::Type::NonConfirmable;
  CHECK(d.producer->handle(non, "p", 0).type == coap::Type::NonConfirmable);
}

TEST_CASE("duplicate retransmission gets the identical response") {
  Deployment d;
  const auto req = d.consumer->request("/temp");
  const auto first = d.producer->handle(req, "c1", 1.0);
  const auto again = d.producer->handle(req, "c1", 3.0);
  CHECK(coap::encode(first) == coap::encode(again));
  CHECK(d.producer->counters().aead == 1);
  CHECK(to_string(d.consumer->accept_response(again, 5)) == "21.5C");
}

TEST_CASE("response to another request cannot be substituted") {
  Deployment d;
  const auto r1 = d.consumer->request("/temp");
  const auto r2 = d.consumer->request("/temp");
  const auto resp1 = d.producer->handle(r1, "c1", 1.0);
  auto forged = resp1;
  forged.token = r2.token;
  forged.message_id = r2.message_id;
  CHECK(error_of([&] { d.consumer->accept_response(forged, 5); }) == Errc::AuthFailure);
  // A failed response leaves the request pending.
  CHECK(d.consumer->pending_count() == 2);
  CHECK(to_string(d.consumer->accept_response(resp1, 5)) == "21.5C");
}

TEST_CASE("certificate checks at the consumer") {
  SUBCASE("expired") {
    Deployment d(100);
    const auto resp = d.producer->handle(d.consumer->request("/temp"), "c1", 1.0);
    CHECK(error_of([&] { d.consumer->accept_response(resp, 100); }) == Errc::CertificateExpired);
  }
  SUBCASE("capability mismatch") {
    Deployment d(std::uint64_t{1} << 40, "humidity-sensor");
    const auto resp = d.producer->handle(d.consumer->request("/temp"), "c1", 1.0);
    CHECK(error_of([&] { d.consumer->accept_response(resp, 5); }) == Errc::CapabilityMismatch);
  }
  SUBCASE("unknown producer, fetched on demand") {
    Deployment d;
    auto c = d.make_consumer("late", 7);
    Grant g = d.as->grant("consumer-1", "pw", "/temp");
    g.certificates.clear();
    c->install_grant(g);
    const auto resp = d.producer->handle(c->request("/temp"), "late", 1.0);
    CHECK(error_of([&] { c->accept_response(resp, 5); }) == Errc::UnknownSigner);
    c->set_certificate_fetcher([&](const std::string& id) { return d.as->certificate(id); });
    CHECK(to_string(c->accept_response(resp, 5)) == "21.5C");
  }
}

TEST_CASE("consumer refuses to ask without a secret") {
  Deployment d;
  CHECK(error_of([&] { d.consumer->request("/humidity"); }) == Errc::NoSecret);
  CHECK(d.consumer->pending_count() == 0);
}

TEST_CASE("authorization server") {
  Deployment d;
  CHECK(error_of([&] { d.as->grant("consumer-1", "wrong", "/temp"); }) == Errc::NotAuthorized);
  CHECK(error_of([&] { d.as->grant("nobody", "pw", "/temp"); }) == Errc::NotAuthorized);
  CHECK(error_of([&] { d.as->grant("consumer-1", "pw", "/humidity"); }) == Errc::NotAuthorized);

  // A secret whose scope reaches beyond the principal's paths is withheld.
  d.as->register_secret(keymat::make_access_secret(2, Bytes(16, 2), {"/a", "/b"}));
  d.as->register_principal("narrow", "pw", {"/a"});
  CHECK(error_of([&] { d.as->grant("narrow", "pw", "/a"); }) == Errc::NotAuthorized);
  d.as->register_principal("wide", "pw", {"/a", "/b"});
  CHECK(d.as->grant("wide", "pw", "/a").secrets.size() == 1);
}

TEST_CASE("secret rotation through PUT /secret") {
  Deployment d;
  const auto update = d.as->rotate(1, Bytes(16, 0x22));
  const auto resp = d.producer->handle(put_secret(update, 10), "as", 1.0);
  CHECK(resp.code == coap::Code::Changed);
  CHECK(d.producer->secrets().front().epoch == 2);
  CHECK(d.producer->secrets().front().secret == Bytes(16, 0x22));

  // Same update again under a new MessageID is idempotent.
  CHECK(d.producer->handle(put_secret(update, 11), "as", 2.0).code == coap::Code::Changed);

  // Old epoch is refused.
  const auto stale = keymat::issue_access_secret(d.secret, d.authority);
  CHECK(d.producer->handle(put_secret(stale, 12), "as", 3.0).code == coap::Code::Unauthorized);

  // Not signed by an anchor.
  const auto rogue = keymat::rotate_access_secret(d.producer->secrets().front(), Bytes(16, 0x33),
                                                  SigningKey::generate());
  CHECK(d.producer->handle(put_secret(rogue, 13), "as", 4.0).code == coap::Code::Unauthorized);

  auto garbage = put_secret(update, 14);
  garbage.payload = {1, 2, 3};
  CHECK(d.producer->handle(garbage, "as", 5.0).code == coap::Code::BadRequest);

  // Consumer with the old secret fails; after a new grant it succeeds.
  const auto resp_old = d.producer->handle(d.consumer->request("/temp"), "c1", 6.0);
  CHECK(error_of([&] { d.consumer->accept_response(resp_old, 5); }) == Errc::AuthFailure);
  d.consumer->install_grant(d.as->grant("consumer-1", "pw", "/temp"));
  CHECK(to_string(d.consumer->accept_response(resp_old, 5)) == "21.5C");
}

TEST_CASE("refresh re-signs without a message") {
  Deployment d;
  d.producer->refresh_resource("/temp", to_bytes("22.0C"), 60.0);
  CHECK(d.producer->counters().signatures == 2);
  CHECK(d.producer->resource("/temp")->signed_at == 60.0);
  CHECK(error_of([&] { d.producer->refresh_resource("/nope", to_bytes("x"), 0); }) == Errc::UnknownPath);
  const auto resp = d.producer->handle(d.consumer->request("/temp"), "c1", 61.0);
  CHECK(to_string(d.consumer->accept_response(resp, 5)) == "22.0C");
}

TEST_CASE("notifications are bound to their MessageID") {
  Deployment d;
  const auto n = d.producer->notification("/temp", 77, Bytes{9});
  CHECK(n.type == coap::Type::NonConfirmable);
  CHECK(n.message_id == 77);
  const auto obj = objsec::decode_object(n.payload);
  CHECK(obj.header.binding_message_id == std::optional<std::uint16_t>{77});
  const auto k = keymat::derive_content_key(d.secret, 77, "prod-01");
  CHECK_NOTHROW(objsec::decrypt_object(obj, k));
}

TEST_CASE("capability policy prefers the longest prefix") {
  CapabilityPolicy p;
  p.require("/", "any");
  p.require("/temp", "temperature-sensor");
  CHECK(p.required_for("/temp/room1") == std::optional<std::string>{"temperature-sensor"});
  CHECK(p.required_for("/x") == std::optional<std::string>{"any"});
  CHECK_FALSE(CapabilityPolicy{}.required_for("/x").has_value());
}

}
