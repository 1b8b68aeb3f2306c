#include "demo.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <optional>
#include <ostream>

#include "oscar/bytes.hpp"
#include "oscar/coap.hpp"
#include "oscar/crypto.hpp"
#include "oscar/error.hpp"
#include "oscar/nodes.hpp"

namespace oscar::tools {
namespace {

class UdpSocket {
 public:
  UdpSocket() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw Error(Errc::IoError, std::string("socket: ") + std::strerror(errno));
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    a.sin_port = 0;
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a) != 0)
      throw Error(Errc::IoError, std::string("bind: ") + std::strerror(errno));
    socklen_t len = sizeof addr_;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr_), &len);
  }
  ~UdpSocket() {
    if (fd_ >= 0) ::close(fd_);
  }
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  const sockaddr_in& address() const { return addr_; }
  int port() const { return ntohs(addr_.sin_port); }

  void send_to(const UdpSocket& peer, ByteView data) const {
    const auto n = ::sendto(fd_, data.data(), data.size(), 0, reinterpret_cast<const sockaddr*>(&peer.addr_),
                            sizeof peer.addr_);
    if (n != static_cast<ssize_t>(data.size())) throw Error(Errc::IoError, "sendto failed");
  }

  std::optional<Bytes> receive(int timeout_ms) const {
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, timeout_ms) <= 0) return std::nullopt;
    Bytes buf(65536);
    const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0) return std::nullopt;
    buf.resize(static_cast<std::size_t>(n));
    return buf;
  }

 private:
  int fd_ = -1;
  sockaddr_in addr_{};
};

Bytes encode_grant_request(const std::string& principal, const std::string& credential, const std::string& path) {
  ByteWriter w;
  for (const auto* s : {&principal, &credential, &path}) {
    w.u16(static_cast<std::uint16_t>(s->size()));
    w.raw(to_bytes(*s));
  }
  return std::move(w).take();
}

Bytes encode_grant_reply(const std::optional<nodes::Grant>& g) {
  ByteWriter w;
  w.u8(g ? 0 : 1);
  if (!g) return std::move(w).take();
  w.u16(static_cast<std::uint16_t>(g->secrets.size()));
  for (const auto& s : g->secrets) {
    const Bytes b = keymat::encode_access_secret(s);
    w.u16(static_cast<std::uint16_t>(b.size()));
    w.raw(b);
  }
  w.u16(static_cast<std::uint16_t>(g->certificates.size()));
  for (const auto& c : g->certificates) {
    const Bytes b = objsec::encode_object(c);
    w.u16(static_cast<std::uint16_t>(b.size()));
    w.raw(b);
  }
  return std::move(w).take();
}

std::optional<nodes::Grant> decode_grant_reply(ByteView data) {
  ByteReader r(data);
  if (r.u8() != 0) return std::nullopt;
  nodes::Grant g;
  for (std::uint16_t n = r.u16(); n > 0; --n) {
    const std::uint16_t len = r.u16();
    g.secrets.push_back(keymat::decode_access_secret(r.take(len)));
  }
  for (std::uint16_t n = r.u16(); n > 0; --n) {
    const std::uint16_t len = r.u16();
    g.certificates.push_back(objsec::decode_object(r.take(len)));
  }
  return g;
}

std::uint64_t random_seed() {
  const Bytes b = crypto::random_bytes(8);
  ByteReader r(b);
  return r.u64();
}

DemoResult failure(std::ostream& out, const std::string& step, const std::string& detail) {
  out << "[" << step << "] FAILED: " << detail << "\n";
  return DemoResult{false, step, detail};
}

}  // namespace

DemoResult run_demo(const DemoOptions& opt, std::ostream& out) {
  const std::string consumer_id = "consumer-1";
  const std::string credential = "pw-consumer-1";
  const std::string other_path = opt.resource_path + "-other";

  // Provisioning: authority, producer identity, one access secret.
  const SigningKey authority = SigningKey::generate();
  const SigningKey producer_key = SigningKey::generate();
  objsec::CertificatePayload cp;
  cp.subject_id = opt.producer_id;
  cp.public_key = producer_key.public_key();
  cp.capabilities = {opt.capability};
  cp.not_before = 0;
  cp.not_after = std::uint64_t{1} << 40;
  const auto cert = objsec::issue_certificate(cp, authority, "authority");

  const auto secret = keymat::make_access_secret(7, crypto::random_bytes(16), {opt.resource_path}, 1);
  const auto other = keymat::make_access_secret(8, crypto::random_bytes(16), {other_path}, 1);

  nodes::Producer producer({opt.producer_id, producer_key, cert}, {authority.public_key()});
  producer.install_secret(secret);
  producer.add_resource(opt.resource_path, to_bytes(opt.representation), 0);

  nodes::AuthzServer as(authority);
  as.register_secret(secret);
  as.register_secret(other);
  as.publish_certificate(cert, {opt.resource_path});
  as.register_principal(consumer_id, credential,
                        {opt.wrong_scope ? other_path : opt.resource_path});

  keymat::TrustStore trust;
  trust.add_anchor(authority.public_key());
  nodes::CapabilityPolicy policy;
  policy.require(opt.resource_path, opt.capability);
  nodes::Consumer consumer(consumer_id, trust, policy, {kSuiteEd25519AesCcm8}, random_seed());

  UdpSocket consumer_sock, producer_sock, as_sock;
  out << "[setup] producer " << opt.producer_id << " on udp/127.0.0.1:" << producer_sock.port()
      << ", authorization server on udp/127.0.0.1:" << as_sock.port() << "\n";

  // grant
  consumer_sock.send_to(as_sock, encode_grant_request(consumer_id, credential, opt.resource_path));
  {
    auto req = as_sock.receive(opt.timeout_ms);
    if (!req) return failure(out, "grant", "no request at authorization server");
    ByteReader r(*req);
    std::string fields[3];
    for (auto& f : fields) f = to_string(r.take(r.u16()));
    std::optional<nodes::Grant> g;
    try {
      g = as.grant(fields[0], fields[1], fields[2]);
    } catch (const Error&) {
    }
    as_sock.send_to(consumer_sock, encode_grant_reply(g));
  }
  auto reply = consumer_sock.receive(opt.timeout_ms);
  if (!reply) return failure(out, "grant", "no reply from authorization server");
  const auto grant = decode_grant_reply(*reply);
  if (!grant) return failure(out, "grant", "not authorized for " + opt.resource_path);
  try {
    consumer.install_grant(*grant);
  } catch (const Error& e) {
    return failure(out, "grant", e.what());
  }
  out << "[grant] ok: " << grant->secrets.size() << " access secret(s), " << grant->certificates.size()
      << " certificate(s)\n";

  // get
  coap::Message get;
  try {
    get = consumer.request(opt.resource_path);
  } catch (const Error& e) {
    return failure(out, "get", e.what());
  }
  const Bytes get_wire = coap::encode(get);
  consumer_sock.send_to(producer_sock, get_wire);
  out << "[get] CON GET " << opt.resource_path << " mid=" << get.message_id << " token=" << to_hex(get.token)
      << " (" << get_wire.size() << " bytes)\n";

  // response
  auto at_producer = producer_sock.receive(opt.timeout_ms);
  if (!at_producer) return failure(out, "response", "request lost");
  const coap::Message resp = producer.handle(coap::decode(*at_producer), "127.0.0.1:" + std::to_string(consumer_sock.port()), 1.0);
  producer_sock.send_to(consumer_sock, coap::encode(resp));
  auto at_consumer = consumer_sock.receive(opt.timeout_ms);
  if (!at_consumer) return failure(out, "response", "response lost");
  coap::Message received = coap::decode(*at_consumer);
  if (received.code != coap::Code::Content)
    return failure(out, "response", "status " + std::to_string(static_cast<int>(received.code)));
  if (opt.tamper && !received.payload.empty()) {
    received.payload[received.payload.size() / 2] ^= 0x01;
    out << "[response] tampering: flipped one payload bit\n";
  }
  try {
    const auto obj = objsec::decode_object(received.payload);
    out << "[response] 2.05 Content mid=" << received.message_id << ", " << received.payload.size()
        << "-byte " << (obj.kind == objsec::Kind::Encrypted ? "encrypted" : "unexpected") << " object, key_id="
        << obj.header.key_id << " sender=" << obj.header.sender_id << "\n";
  } catch (const Error& e) {
    return failure(out, "response", e.what());
  }

  // verify
  Bytes representation;
  try {
    representation = consumer.accept_response(received, 1);
  } catch (const Error& e) {
    return failure(out, "verify", e.what());
  }
  out << "[verify] ok: signature by " << opt.producer_id << " verified, capability " << opt.capability
      << ", representation \"" << to_string(representation) << "\"\n";
  return DemoResult{true, "", ""};
}

}  // namespace oscar::tools
