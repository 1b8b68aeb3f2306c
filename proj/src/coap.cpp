#include "oscar/coap.hpp"

#include <algorithm>
#include <cstdio>

namespace oscar::coap {

namespace {

constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kPayloadMarker = 0xFF;

void put_extended(ByteWriter& w, std::uint32_t v) {
  if (v >= 269) {
    w.u16(static_cast<std::uint16_t>(v - 269));
  } else if (v >= 13) {
    w.u8(static_cast<std::uint8_t>(v - 13));
  }
}

std::uint8_t nibble_for(std::uint32_t v) {
  if (v < 13) return static_cast<std::uint8_t>(v);
  if (v < 269) return 13;
  return 14;
}

std::uint32_t read_extended(ByteReader& r, std::uint8_t nib) {
  switch (nib) {
    case 13: return 13u + r.u8();
    case 14: return 269u + r.u16();
    case 15: throw Error(Errc::Malformed, "reserved option nibble 15");
    default: return nib;
  }
}

}  // namespace

std::string code_string(Code c) {
  const auto v = static_cast<std::uint8_t>(c);
  char buf[8];
  std::snprintf(buf, sizeof buf, "%u.%02u", v >> 5, v & 0x1F);
  return buf;
}

const Option* Message::find_option(std::uint16_t number) const {
  for (const auto& o : options)
    if (o.number == number) return &o;
  return nullptr;
}

std::string Message::uri_path() const {
  std::string path;
  for (const auto& o : options) {
    if (o.number != option::kUriPath) continue;
    path += '/';
    path += to_string(o.value);
  }
  return path.empty() ? "/" : path;
}

void Message::set_uri_path(const std::string& path) {
  std::erase_if(options, [](const Option& o) { return o.number == option::kUriPath; });
  std::size_t pos = 0;
  while (pos < path.size()) {
    if (path[pos] == '/') {
      ++pos;
      continue;
    }
    auto end = path.find('/', pos);
    if (end == std::string::npos) end = path.size();
    options.push_back(Option{option::kUriPath, to_bytes(path.substr(pos, end - pos))});
    pos = end;
  }
  canonicalize(*this);
}

void canonicalize(Message& msg) {
  std::stable_sort(msg.options.begin(), msg.options.end(),
                   [](const Option& a, const Option& b) { return a.number < b.number; });
}

Bytes encode(const Message& msg) {
  if (msg.token.size() > kMaxTokenBytes) throw Error(Errc::TokenTooLong);

  ByteWriter w;
  w.u8(static_cast<std::uint8_t>((kVersion << 6) | (static_cast<std::uint8_t>(msg.type) << 4) |
                                 msg.token.size()));
  w.u8(static_cast<std::uint8_t>(msg.code));
  w.u16(msg.message_id);
  w.raw(msg.token);

  std::vector<const Option*> sorted;
  sorted.reserve(msg.options.size());
  for (const auto& o : msg.options) sorted.push_back(&o);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Option* a, const Option* b) { return a->number < b->number; });

  std::uint32_t previous = 0;
  for (const Option* o : sorted) {
    if (o->value.size() > 65535u + 269u) throw Error(Errc::OversizeBody, "option value too long");
    const std::uint32_t delta = o->number - previous;
    const auto length = static_cast<std::uint32_t>(o->value.size());
    w.u8(static_cast<std::uint8_t>((nibble_for(delta) << 4) | nibble_for(length)));
    put_extended(w, delta);
    put_extended(w, length);
    w.raw(o->value);
    previous = o->number;
  }

  if (!msg.payload.empty()) {
    w.u8(kPayloadMarker);
    w.raw(msg.payload);
  }
  return std::move(w).take();
}

Message decode(ByteView wire) {
  if (wire.size() < 4) throw Error(Errc::Malformed, "CoAP header needs 4 bytes");
  ByteReader r(wire);
  Message msg;

  const std::uint8_t first = r.u8();
  if ((first >> 6) != kVersion) throw Error(Errc::Malformed, "unsupported CoAP version");
  msg.type = static_cast<Type>((first >> 4) & 0x3);
  const std::size_t tkl = first & 0x0F;
  if (tkl > kMaxTokenBytes) throw Error(Errc::Malformed, "token length > 8");
  msg.code = static_cast<Code>(r.u8());
  msg.message_id = r.u16();
  auto token = r.take(tkl);
  msg.token.assign(token.begin(), token.end());

  std::uint32_t number = 0;
  while (!r.empty()) {
    const std::uint8_t head = r.u8();
    if (head == kPayloadMarker) {
      if (r.empty()) throw Error(Errc::Malformed, "payload marker with empty payload");
      auto payload = r.rest();
      msg.payload.assign(payload.begin(), payload.end());
      break;
    }
    number += read_extended(r, head >> 4);
    const std::uint32_t length = read_extended(r, head & 0x0F);
    if (number > 0xFFFF) throw Error(Errc::Malformed, "option number overflow");
    auto value = r.take(length);
    msg.options.push_back(Option{static_cast<std::uint16_t>(number), Bytes(value.begin(), value.end())});
  }
  return msg;
}

bool is_critical(std::uint16_t number) { return (number & 1) != 0; }

bool is_known_option(std::uint16_t number) {
  switch (number) {
    case 1: case 3: case 4: case 5: case 6: case 7: case 8: case 11: case 12:
    case 14: case 15: case 17: case 20: case 35: case 39: case 60:
    case option::kAcceptCipher:
      return true;
    default:
      return false;
  }
}

std::vector<std::uint16_t> unknown_critical_options(const Message& msg) {
  std::vector<std::uint16_t> out;
  for (const auto& o : msg.options)
    if (is_critical(o.number) && !is_known_option(o.number)) out.push_back(o.number);
  return out;
}

Option make_accept_cipher_option(const std::vector<SuiteId>& suites) {
  if (suites.empty()) throw Error(Errc::Malformed, "Accept-Cipher needs at least one suite");
  if (suites.size() > kMaxAcceptedSuites) throw Error(Errc::TooManySuites);
  return Option{option::kAcceptCipher, Bytes(suites.begin(), suites.end())};
}

std::vector<SuiteId> parse_accept_cipher(const Option& opt) {
  if (opt.number != option::kAcceptCipher) throw Error(Errc::Malformed, "not an Accept-Cipher option");
  if (opt.value.empty()) throw Error(Errc::Malformed, "empty Accept-Cipher option");
  if (opt.value.size() > kMaxAcceptedSuites) throw Error(Errc::TooManySuites);
  return std::vector<SuiteId>(opt.value.begin(), opt.value.end());
}

std::optional<SuiteId> negotiate_suite(const std::vector<SuiteId>& offered,
                                       const std::vector<SuiteId>& supported) {
  for (SuiteId s : offered)
    if (std::find(supported.begin(), supported.end(), s) != supported.end()) return s;
  return std::nullopt;
}

DuplicateWindow::DuplicateWindow(double span, std::size_t ring_size, std::size_t max_peers)
    : span_(span), ring_size_(ring_size), max_peers_(max_peers) {}

void DuplicateWindow::expire(double now) {
  for (auto it = peers_.begin(); it != peers_.end();) {
    auto& ring = it->second.ring;
    while (!ring.empty() && now - ring.front().time >= span_) ring.pop_front();
    it = ring.empty() ? peers_.erase(it) : std::next(it);
  }
}

bool DuplicateWindow::check(const std::string& peer, std::uint16_t message_id, double now) {
  expire(now);

  bool duplicate = false;
  if (auto it = peers_.find(peer); it != peers_.end()) {
    for (const auto& s : it->second.ring)
      if (s.message_id == message_id && now - s.time < span_) duplicate = true;
  }

  if (!peers_.contains(peer) && peers_.size() >= max_peers_) {
    auto oldest = std::min_element(peers_.begin(), peers_.end(), [](const auto& a, const auto& b) {
      return a.second.last_seen < b.second.last_seen;
    });
    peers_.erase(oldest);
  }

  auto& p = peers_[peer];
  p.last_seen = now;
  if (!duplicate) {
    p.ring.push_back(Sighting{message_id, now, {}});
    if (p.ring.size() > ring_size_) p.ring.pop_front();
  }
  return duplicate;
}

const Bytes* DuplicateWindow::cached_response(const std::string& peer,
                                              std::uint16_t message_id) const {
  auto it = peers_.find(peer);
  if (it == peers_.end()) return nullptr;
  for (auto s = it->second.ring.rbegin(); s != it->second.ring.rend(); ++s)
    if (s->message_id == message_id) return s->response.empty() ? nullptr : &s->response;
  return nullptr;
}

void DuplicateWindow::attach_response(const std::string& peer, std::uint16_t message_id,
                                      Bytes response) {
  auto it = peers_.find(peer);
  if (it == peers_.end()) return;
  for (auto s = it->second.ring.rbegin(); s != it->second.ring.rend(); ++s) {
    if (s->message_id == message_id) {
      s->response = std::move(response);
      return;
    }
  }
}

std::size_t DuplicateWindow::entry_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : peers_) n += p.ring.size();
  return n;
}

}  // namespace oscar::coap
