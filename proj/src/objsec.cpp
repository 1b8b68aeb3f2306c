#include "oscar/objsec.hpp"

#include <algorithm>
#include <sstream>

#include "oscar/crypto.hpp"

namespace oscar::objsec {

namespace {

constexpr std::uint8_t kKeyFileVersion = 1;

void check_header(Kind kind, const ObjectHeader& h) {
  if (h.version != kVersion) throw Error(Errc::Malformed, "unsupported object version");
  if (h.sender_id.empty() || h.sender_id.size() > kMaxIdBytes)
    throw Error(Errc::Malformed, "sender id must be 1..32 bytes");
  if (!find_suite(h.suite)) throw Error(Errc::Malformed, "unregistered cipher suite");
  if ((kind == Kind::Encrypted) != h.binding_message_id.has_value())
    throw Error(Errc::Malformed, "binding message id present iff Encrypted");
}

Kind parse_kind(std::uint8_t v) {
  if (v < 1 || v > 3) throw Error(Errc::Malformed, "unknown object kind");
  return static_cast<Kind>(v);
}

// Decodes exactly one layer without looking into the body.
SecureObject decode_layer(ByteView bytes) {
  ByteReader r(bytes);
  SecureObject obj;
  obj.header.version = r.u8();
  if (obj.header.version != kVersion) throw Error(Errc::Malformed, "unknown version");
  obj.kind = parse_kind(r.u8());
  obj.header.suite = r.u8();
  const std::size_t id_len = r.u8();
  obj.header.sender_id = to_string(r.take(id_len));
  obj.header.key_id = r.u16();
  if (obj.kind == Kind::Encrypted) obj.header.binding_message_id = r.u16();
  const std::size_t body_len = r.u16();
  auto body = r.take(body_len);
  obj.body.assign(body.begin(), body.end());
  auto auth = r.rest();
  obj.auth.assign(auth.begin(), auth.end());

  check_header(obj.kind, obj.header);
  if (obj.kind == Kind::Certificate) (void)decode_certificate_payload(obj.body);
  return obj;
}

Bytes signed_region(const SecureObject& obj) {
  Bytes region = encode_header(obj.kind, obj.header);
  ByteWriter w;
  w.u16(static_cast<std::uint16_t>(obj.body.size()));
  w.raw(obj.body);
  region.insert(region.end(), w.bytes().begin(), w.bytes().end());
  return region;
}

SecureObject make_signed(Kind kind, ByteView payload, const SigningKey& key,
                         const std::string& signer_id, std::uint16_t key_id) {
  if (signer_id.empty() || signer_id.size() > kMaxIdBytes)
    throw Error(Errc::Malformed, "signer id must be 1..32 bytes");
  if (payload.size() > kMaxBody) throw Error(Errc::OversizeBody);
  if (kind == Kind::Signed && nesting_depth(payload) >= kMaxNestingDepth) throw Error(Errc::NestingTooDeep);
  const auto& suite = suite_or_throw(key.suite);
  if (key.bytes.size() != suite.private_key_bytes())
    throw Error(Errc::KeyInvalid, "private key has wrong length for suite");

  SecureObject obj;
  obj.kind = kind;
  obj.header.suite = key.suite;
  obj.header.sender_id = signer_id;
  obj.header.key_id = key_id;
  obj.body.assign(payload.begin(), payload.end());
  obj.auth = suite.sign(key.bytes, signed_region(obj));
  return obj;
}

}  // namespace

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::Signed: return "signed";
    case Kind::Encrypted: return "encrypted";
    case Kind::Certificate: return "certificate";
  }
  return "unknown";
}

bool CertificatePayload::has_capability(const std::string& cap) const {
  return std::find(capabilities.begin(), capabilities.end(), cap) != capabilities.end();
}

Bytes encode_header(Kind kind, const ObjectHeader& h) {
  check_header(kind, h);
  ByteWriter w;
  w.u8(h.version);
  w.u8(static_cast<std::uint8_t>(kind));
  w.u8(h.suite);
  w.u8(static_cast<std::uint8_t>(h.sender_id.size()));
  w.raw(h.sender_id);
  w.u16(h.key_id);
  if (h.binding_message_id) w.u16(*h.binding_message_id);
  return std::move(w).take();
}

Bytes encode_object(const SecureObject& obj) {
  if (obj.body.size() > kMaxBody) throw Error(Errc::OversizeBody);
  if (obj.kind == Kind::Signed && nesting_depth(obj.body) >= kMaxNestingDepth)
    throw Error(Errc::NestingTooDeep);
  Bytes out = signed_region(obj);
  out.insert(out.end(), obj.auth.begin(), obj.auth.end());
  return out;
}

int nesting_depth(ByteView bytes) {
  SecureObject layer;
  try {
    layer = decode_layer(bytes);
  } catch (const Error&) {
    return 0;
  }
  if (layer.kind != Kind::Signed) return 1;
  return 1 + nesting_depth(layer.body);
}

SecureObject decode_object(ByteView bytes, int max_depth) {
  if (bytes.empty()) throw Error(Errc::Malformed, "empty input");
  SecureObject obj = decode_layer(bytes);
  if (max_depth < 1) throw Error(Errc::NestingTooDeep);
  if (obj.kind == Kind::Signed && nesting_depth(obj.body) + 1 > max_depth)
    throw Error(Errc::NestingTooDeep);
  return obj;
}

SecureObject sign_object(ByteView payload, const SigningKey& key, const std::string& signer_id,
                         std::uint16_t key_id) {
  return make_signed(Kind::Signed, payload, key, signer_id, key_id);
}

bool verify_object(const SecureObject& obj, const VerifyKey& key) noexcept {
  if (obj.kind == Kind::Encrypted) return false;
  if (key.suite != obj.header.suite) return false;
  try {
    const auto* suite = find_suite(key.suite);
    if (!suite) return false;
    return suite->verify(key.bytes, signed_region(obj), obj.auth);
  } catch (...) {
    return false;
  }
}

std::array<std::uint8_t, 13> aead_nonce(std::uint16_t key_id, const std::string& sender_id,
                                        std::uint16_t message_id) {
  ByteWriter w;
  w.u16(key_id);
  w.raw(sender_id);
  w.u16(message_id);
  const auto digest = crypto::sha256(w.bytes());
  std::array<std::uint8_t, 13> nonce{};
  std::copy_n(digest.begin(), nonce.size(), nonce.begin());
  return nonce;
}

SecureObject encrypt_object(ByteView plaintext, const ContentKey& key, const ObjectHeader& header) {
  if (!header.binding_message_id)
    throw Error(Errc::Malformed, "encrypted object needs a binding message id");
  if (plaintext.size() > kMaxBody) throw Error(Errc::OversizeBody);
  const auto& suite = suite_or_throw(header.suite);

  SecureObject obj;
  obj.kind = Kind::Encrypted;
  obj.header = header;
  const Bytes aad = encode_header(obj.kind, obj.header);
  const auto nonce = aead_nonce(header.key_id, header.sender_id, *header.binding_message_id);
  Bytes sealed = crypto::aes_ccm_seal(key.bytes, nonce, aad, plaintext, suite.tag_bytes());
  obj.auth.assign(sealed.end() - static_cast<long>(suite.tag_bytes()), sealed.end());
  sealed.resize(sealed.size() - suite.tag_bytes());
  obj.body = std::move(sealed);
  return obj;
}

Bytes decrypt_object(const SecureObject& obj, const ContentKey& key) {
  if (obj.kind != Kind::Encrypted || !obj.header.binding_message_id)
    throw Error(Errc::Malformed, "not an encrypted object");
  const auto& suite = suite_or_throw(obj.header.suite);
  if (obj.auth.size() != suite.tag_bytes()) throw Error(Errc::AuthFailure, "bad tag length");
  const Bytes aad = encode_header(obj.kind, obj.header);
  const auto nonce =
      aead_nonce(obj.header.key_id, obj.header.sender_id, *obj.header.binding_message_id);
  Bytes sealed = obj.body;
  sealed.insert(sealed.end(), obj.auth.begin(), obj.auth.end());
  return crypto::aes_ccm_open(key.bytes, nonce, aad, sealed, suite.tag_bytes());
}

Bytes encode_certificate_payload(const CertificatePayload& p) {
  if (p.subject_id.empty() || p.subject_id.size() > kMaxIdBytes)
    throw Error(Errc::Malformed, "subject id must be 1..32 bytes");
  if (p.not_before >= p.not_after) throw Error(Errc::ValidityInverted);
  if (p.capabilities.size() > 255) throw Error(Errc::Malformed, "too many capabilities");
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(p.subject_id.size()));
  w.raw(p.subject_id);
  w.u8(p.public_key.suite);
  w.u16(static_cast<std::uint16_t>(p.public_key.bytes.size()));
  w.raw(p.public_key.bytes);
  w.u8(static_cast<std::uint8_t>(p.capabilities.size()));
  for (const auto& c : p.capabilities) {
    if (c.size() > 255) throw Error(Errc::Malformed, "capability too long");
    w.u8(static_cast<std::uint8_t>(c.size()));
    w.raw(c);
  }
  if (p.location) {
    if (p.location->size() > 255) throw Error(Errc::Malformed, "location too long");
    w.u8(1);
    w.u8(static_cast<std::uint8_t>(p.location->size()));
    w.raw(*p.location);
  } else {
    w.u8(0);
  }
  w.u64(p.not_before);
  w.u64(p.not_after);
  return std::move(w).take();
}

CertificatePayload decode_certificate_payload(ByteView bytes) {
  ByteReader r(bytes);
  CertificatePayload p;
  p.subject_id = to_string(r.take(r.u8()));
  p.public_key.suite = r.u8();
  auto key = r.take(r.u16());
  p.public_key.bytes.assign(key.begin(), key.end());
  const std::size_t n_caps = r.u8();
  for (std::size_t i = 0; i < n_caps; ++i) p.capabilities.push_back(to_string(r.take(r.u8())));
  const std::uint8_t has_location = r.u8();
  if (has_location > 1) throw Error(Errc::Malformed, "bad location flag");
  if (has_location) p.location = to_string(r.take(r.u8()));
  p.not_before = r.u64();
  p.not_after = r.u64();
  if (!r.empty()) throw Error(Errc::Malformed, "trailing bytes in certificate");
  if (p.subject_id.empty() || p.subject_id.size() > kMaxIdBytes)
    throw Error(Errc::Malformed, "subject id must be 1..32 bytes");
  if (p.not_before >= p.not_after) throw Error(Errc::Malformed, "inverted validity window");
  return p;
}

SecureObject issue_certificate(const CertificatePayload& payload, const SigningKey& anchor_key,
                               const std::string& issuer_id) {
  if (payload.not_before >= payload.not_after) throw Error(Errc::ValidityInverted);
  return make_signed(Kind::Certificate, encode_certificate_payload(payload), anchor_key, issuer_id, 0);
}

CertificatePayload certificate_payload(const SecureObject& cert) {
  if (cert.kind != Kind::Certificate) throw Error(Errc::Malformed, "not a certificate");
  return decode_certificate_payload(cert.body);
}

Bytes encode_key_file(const KeyFile& k) {
  if (k.owner_id.size() > kMaxIdBytes) throw Error(Errc::Malformed, "owner id too long");
  ByteWriter w;
  w.u8(kKeyFileVersion);
  w.u8(static_cast<std::uint8_t>(k.type));
  w.u8(k.suite);
  w.u8(static_cast<std::uint8_t>(k.owner_id.size()));
  w.raw(k.owner_id);
  w.u16(static_cast<std::uint16_t>(k.key.size()));
  w.raw(k.key);
  return std::move(w).take();
}

KeyFile decode_key_file(ByteView bytes) {
  ByteReader r(bytes);
  if (r.u8() != kKeyFileVersion) throw Error(Errc::Malformed, "unknown key file version");
  KeyFile k;
  const std::uint8_t type = r.u8();
  if (type != 0x10 && type != 0x11) throw Error(Errc::Malformed, "not a key file");
  k.type = static_cast<KeyFile::Type>(type);
  k.suite = r.u8();
  k.owner_id = to_string(r.take(r.u8()));
  auto key = r.take(r.u16());
  k.key.assign(key.begin(), key.end());
  if (!r.empty()) throw Error(Errc::Malformed, "trailing bytes in key file");
  return k;
}

std::string describe(const SecureObject& obj) {
  std::ostringstream os;
  os << "kind:          " << kind_name(obj.kind) << "\n"
     << "version:       " << int(obj.header.version) << "\n"
     << "cipher_suite:  " << int(obj.header.suite);
  if (const auto* s = find_suite(obj.header.suite)) os << " (" << s->name() << ")";
  os << "\n"
     << "sender_id:     " << obj.header.sender_id << "\n"
     << "key_id:        " << obj.header.key_id << "\n";
  if (obj.header.binding_message_id)
    os << "binding_mid:   " << *obj.header.binding_message_id << "\n";
  os << "body_bytes:    " << obj.body.size() << "\n"
     << "auth_bytes:    " << obj.auth.size() << "\n";

  if (obj.kind == Kind::Certificate) {
    const auto p = decode_certificate_payload(obj.body);
    os << "subject_id:    " << p.subject_id << "\n"
       << "public_key:    " << to_hex(p.public_key.bytes) << "\n"
       << "capabilities:  ";
    for (std::size_t i = 0; i < p.capabilities.size(); ++i)
      os << (i ? "," : "") << p.capabilities[i];
    os << "\n";
    if (p.location) os << "location:      " << *p.location << "\n";
    os << "not_before:    " << p.not_before << "\n"
       << "not_after:     " << p.not_after << "\n";
  } else if (obj.kind == Kind::Signed && nesting_depth(obj.body) > 0) {
    std::string inner = describe(decode_layer(obj.body));
    std::string indented;
    std::istringstream is(inner);
    for (std::string line; std::getline(is, line);) indented += "  " + line + "\n";
    os << "nested:\n" << indented;
  } else if (obj.kind == Kind::Signed) {
    os << "body_hex:      " << to_hex(obj.body) << "\n";
  }
  return os.str();
}

std::string describe(const KeyFile& k) {
  std::ostringstream os;
  os << "kind:          " << (k.type == KeyFile::Type::Private ? "private-key" : "public-key") << "\n"
     << "cipher_suite:  " << int(k.suite) << "\n"
     << "owner_id:      " << k.owner_id << "\n"
     << "key_bytes:     " << k.key.size() << "\n";
  if (k.type == KeyFile::Type::Public) os << "key_hex:       " << to_hex(k.key) << "\n";
  return os.str();
}

}  // namespace oscar::objsec
