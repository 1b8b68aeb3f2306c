#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "oscar/coap.hpp"
#include "oscar/error.hpp"

using namespace oscar;
using namespace oscar::coap;

TEST_SUITE("coap") {

TEST_CASE("codec round-trips random messages") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20000; ++i) {
    Message m = testing::random_message(rng);
    const Bytes wire = encode(m);
    canonicalize(m);
    REQUIRE(decode(wire) == m);
    REQUIRE(encode(decode(wire)) == wire);
  }
}

TEST_CASE("known encoding of a GET") {
  Message m;
  m.type = Type::Confirmable;
  m.code = Code::Get;
  m.message_id = 0x1234;
  m.token = {0xAA, 0xBB};
  m.set_uri_path("/temp");
  CHECK(to_hex(encode(m)) == "420112" "34" "aabb" "b474656d70");
  CHECK(decode(encode(m)).uri_path() == "/temp");
}

TEST_CASE("multi-segment path and extended option deltas") {
  Message m;
  m.set_uri_path("/a/bb/ccc");
  m.options.push_back(Option{option::kAcceptCipher, {1, 2}});
  m.options.push_back(Option{300, Bytes(20, 7)});
  const Message back = decode(encode(m));
  CHECK(back.uri_path() == "/a/bb/ccc");
  REQUIRE(back.find_option(option::kAcceptCipher));
  CHECK(back.find_option(option::kAcceptCipher)->value == Bytes{1, 2});
  CHECK(back.find_option(300)->value.size() == 20);
}

TEST_CASE("decoder rejects malformed input") {
  auto code_of = [](const Bytes& b) {
    try {
      decode(b);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::CryptoFailure;  // sentinel: decoded
  };
  CHECK(code_of({0x40, 0x01, 0x00}) == Errc::Malformed);             // short header
  CHECK(code_of({0x80, 0x01, 0x00, 0x01}) == Errc::Malformed);       // version 2
  CHECK(code_of({0x49, 0x01, 0x00, 0x01}) == Errc::Malformed);       // tkl 9
  CHECK(code_of({0x42, 0x01, 0x00, 0x01, 0xAA}) == Errc::Malformed); // truncated token
  CHECK(code_of({0x40, 0x01, 0x00, 0x01, 0xF0}) == Errc::Malformed); // marker, no payload
  CHECK(code_of({0x40, 0x01, 0x00, 0x01, 0xF1}) == Errc::Malformed); // delta nibble 15
  CHECK(code_of({0x40, 0x01, 0x00, 0x01, 0x1F}) == Errc::Malformed); // length nibble 15
  CHECK(code_of({0x40, 0x01, 0x00, 0x01, 0x13, 'a'}) == Errc::Malformed);  // truncated value
  CHECK(code_of({0x40, 0x01, 0x00, 0x01, 0xE0, 0xFF, 0xFF, 0xE0, 0xFF, 0xFF}) == Errc::Malformed);
}

TEST_CASE("random input never crashes the decoder") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20000; ++i) {
    Bytes b = testing::random_bytes(rng, 0, 40);
    if (b.size() > 0) b[0] = static_cast<std::uint8_t>(0x40 | (b[0] & 0x3F));
    try {
      const Message m = decode(b);
      CHECK(m.token.size() <= kMaxTokenBytes);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Malformed);
    }
  }
}

TEST_CASE("token longer than 8 bytes is refused") {
  Message m;
  m.token = Bytes(9, 1);
  CHECK_THROWS_AS(encode(m), Error);
  try {
    encode(m);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TokenTooLong);
  }
}

TEST_CASE("critical option classification") {
  CHECK(is_critical(option::kUriPath));
  CHECK_FALSE(is_critical(option::kContentFormat));
  Message m;
  m.options.push_back(Option{option::kUriPath, to_bytes("x")});
  m.options.push_back(Option{option::kAcceptCipher, {1}});
  m.options.push_back(Option{9, {}});
  m.options.push_back(Option{2000, {}});
  CHECK(unknown_critical_options(m) == std::vector<std::uint16_t>{9});
}

TEST_CASE("accept-cipher negotiation") {
  CHECK(parse_accept_cipher(make_accept_cipher_option({3, 1, 2})) == std::vector<SuiteId>{3, 1, 2});
  CHECK(negotiate_suite({3, 1, 2}, {1, 2}) == SuiteId{1});
  CHECK(negotiate_suite({2, 1}, {1, 2}) == SuiteId{2});
  CHECK_FALSE(negotiate_suite({4}, {1}).has_value());
  CHECK_THROWS_AS(make_accept_cipher_option({}), Error);
  try {
    make_accept_cipher_option(std::vector<SuiteId>(9, 1));
    FAIL("nine suites accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooManySuites);
  }
}

TEST_CASE("duplicate window") {
  DuplicateWindow w;
  CHECK_FALSE(w.check("p", 1, 0.0));
  CHECK(w.check("p", 1, 10.0));
  CHECK_FALSE(w.check("q", 1, 10.0));  // per peer
  CHECK_FALSE(w.check("p", 2, 10.0));
  // The duplicate did not refresh the first sighting.
  CHECK_FALSE(w.check("p", 1, 247.0));

  w.attach_response("p", 2, Bytes{9});
  REQUIRE(w.cached_response("p", 2));
  CHECK(*w.cached_response("p", 2) == Bytes{9});
  CHECK(w.cached_response("p", 3) == nullptr);
}

TEST_CASE("duplicate window bounds") {
  DuplicateWindow w(247.0, 4, 2);
  for (std::uint16_t mid = 0; mid < 6; ++mid) w.check("p", mid, 1.0);
  CHECK(w.entry_count() == 4);
  CHECK_FALSE(w.check("p", 0, 2.0));  // pushed out of the ring
  w.check("q", 1, 3.0);
  w.check("r", 1, 4.0);  // evicts the least recently seen peer
  CHECK(w.peer_count() == 2);
}

}
