#include <doctest.h>

#include "oscar/error.hpp"
#include "oscar/keymat.hpp"

using namespace oscar;
using namespace oscar::keymat;

TEST_SUITE("keymat") {

TEST_CASE("secret length bounds") {
  CHECK_NOTHROW(make_access_secret(1, Bytes(16, 0), {"/a"}));
  CHECK_NOTHROW(make_access_secret(1, Bytes(32, 0), {"/a"}));
  CHECK_THROWS_AS(make_access_secret(1, Bytes(15, 0), {"/a"}), Error);
  CHECK_THROWS_AS(make_access_secret(1, Bytes(33, 0), {"/a"}), Error);
}

TEST_CASE("access secret encoding round-trips") {
  const auto s = make_access_secret(0xBEEF, Bytes(24, 0x5A), {"/a", "/b/c"}, 7);
  CHECK(decode_access_secret(encode_access_secret(s)) == s);
  Bytes trailing = encode_access_secret(s);
  trailing.push_back(1);
  CHECK_THROWS_AS(decode_access_secret(trailing), Error);
  CHECK_THROWS_AS(decode_access_secret(Bytes{0, 1}), Error);
}

TEST_CASE("content keys are deterministic") {
  const auto s = make_access_secret(1, Bytes(16, 3), {"/a"});
  CHECK(derive_content_key(s, 9, "p") == derive_content_key(s, 9, "p"));
  CHECK(derive_content_key(s, 9, "p").bytes != derive_content_key(s, 10, "p").bytes);
  const auto other = make_access_secret(1, Bytes(16, 4), {"/a"});
  CHECK(derive_content_key(s, 9, "p").bytes != derive_content_key(other, 9, "p").bytes);
  CHECK_THROWS_AS(derive_content_key(s, 9, ""), Error);
}

TEST_CASE("lookup by resource") {
  std::vector<AccessSecret> store{make_access_secret(1, Bytes(16, 1), {"/a", "/b"}),
                                  make_access_secret(2, Bytes(16, 2), {"/c"})};
  CHECK(lookup_secret_for_resource(store, "/b").key_id == 1);
  CHECK(lookup_secret_for_resource(store, "/c").key_id == 2);
  try {
    lookup_secret_for_resource(store, "/d");
    FAIL("found a secret for /d");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoSecret);
  }
  store.push_back(make_access_secret(3, Bytes(16, 3), {"/c"}));
  try {
    lookup_secret_for_resource(store, "/c");
    FAIL("ambiguous scope accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::AmbiguousScope);
  }
  CHECK_THROWS_AS(check_scope_partition(store), Error);
}

TEST_CASE("rotation bumps the epoch and is authority-signed") {
  const auto authority = SigningKey::generate();
  const auto old = make_access_secret(5, Bytes(16, 1), {"/a"}, 3);
  const auto obj = rotate_access_secret(old, Bytes(16, 9), authority);
  CHECK(objsec::verify_object(obj, authority.public_key()));
  CHECK(obj.header.key_id == 5);
  const auto next = decode_access_secret(obj.body);
  CHECK(next.epoch == 4);
  CHECK(next.resource_scope == old.resource_scope);
  CHECK(next.secret == Bytes(16, 9));
  CHECK_THROWS_AS(rotate_access_secret(old, Bytes(8, 0), authority), Error);
}

TEST_CASE("trust store") {
  const auto anchor = SigningKey::generate();
  const auto rogue = SigningKey::generate();
  TrustStore t;
  t.add_anchor(anchor.public_key());
  t.add_anchor(anchor.public_key());
  CHECK(t.anchors().size() == 1);

  objsec::CertificatePayload p;
  p.subject_id = "prod-01";
  p.public_key = SigningKey::generate().public_key();
  p.capabilities = {"c"};
  p.not_after = 10;
  const auto good = objsec::issue_certificate(p, anchor);
  const auto bad = objsec::issue_certificate(p, rogue);
  CHECK(t.verified_by_anchor(good));
  CHECK_FALSE(t.verified_by_anchor(bad));
  try {
    t.add_certificate(bad);
    FAIL("rogue certificate accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownSigner);
  }
  t.add_certificate(good);
  REQUIRE(t.find_certificate("prod-01"));
  CHECK(*t.find_certificate("prod-01") == good);
  CHECK(t.find_certificate("prod-02") == nullptr);
}

}
