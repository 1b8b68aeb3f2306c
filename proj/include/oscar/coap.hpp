#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oscar/bytes.hpp"
#include "oscar/suites.hpp"

// The subset of RFC 7252 framing the object-security layer rides on.
namespace oscar::coap {

enum class Type : std::uint8_t { Confirmable = 0, NonConfirmable = 1, Ack = 2, Reset = 3 };

// Code byte: class in the top 3 bits, detail in the low 5. Values outside the
// named set still round-trip through the codec.
enum class Code : std::uint8_t {
  Empty = 0x00,
  Get = 0x01,
  Put = 0x03,
  Changed = 0x44,        // 2.04
  Content = 0x45,        // 2.05
  BadRequest = 0x80,     // 4.00
  Unauthorized = 0x81,   // 4.01
  BadOption = 0x82,      // 4.02
  NotFound = 0x84,       // 4.04
  NotAcceptable = 0x86,  // 4.06
};

std::string code_string(Code c);

namespace option {
inline constexpr std::uint16_t kUriHost = 3;
inline constexpr std::uint16_t kObserve = 6;
inline constexpr std::uint16_t kUriPath = 11;
inline constexpr std::uint16_t kContentFormat = 12;
inline constexpr std::uint16_t kAccept = 17;
// Experimental-use range.
inline constexpr std::uint16_t kAcceptCipher = 65001;
}  // namespace option

struct Option {
  std::uint16_t number = 0;
  Bytes value;

  bool operator==(const Option&) const = default;
};

struct Message {
  Type type = Type::Confirmable;
  Code code = Code::Empty;
  std::uint16_t message_id = 0;
  Bytes token;
  std::vector<Option> options;
  Bytes payload;

  bool operator==(const Message&) const = default;

  const Option* find_option(std::uint16_t number) const;
  std::string uri_path() const;
  void set_uri_path(const std::string& path);
};

inline constexpr std::size_t kMaxTokenBytes = 8;

// Options are emitted in ascending number order (stable for repeats).
Bytes encode(const Message& msg);
Message decode(ByteView wire);

// Sorts options into the canonical order encode() uses.
void canonicalize(Message& msg);

bool is_critical(std::uint16_t number);
bool is_known_option(std::uint16_t number);
// Critical options the decoder does not recognise; a server answers 4.02.
std::vector<std::uint16_t> unknown_critical_options(const Message& msg);

inline constexpr std::size_t kMaxAcceptedSuites = 8;

Option make_accept_cipher_option(const std::vector<SuiteId>& suites);
std::vector<SuiteId> parse_accept_cipher(const Option& opt);
// First suite in the client's preference order that the server supports.
std::optional<SuiteId> negotiate_suite(const std::vector<SuiteId>& offered,
                                       const std::vector<SuiteId>& supported);

// Per-peer record of recent MessageIDs.
class DuplicateWindow {
 public:
  static constexpr double kDefaultSpan = 247.0;
  static constexpr std::size_t kDefaultRingSize = 32;
  static constexpr std::size_t kDefaultMaxPeers = 32;

  explicit DuplicateWindow(double span = kDefaultSpan, std::size_t ring_size = kDefaultRingSize,
                           std::size_t max_peers = kDefaultMaxPeers);

  // True iff (peer, message_id) was seen less than span seconds ago.
  // Records new sightings; a duplicate does not refresh its entry.
  bool check(const std::string& peer, std::uint16_t message_id, double now);

  // Response retained for a recorded sighting, if any.
  const Bytes* cached_response(const std::string& peer, std::uint16_t message_id) const;
  void attach_response(const std::string& peer, std::uint16_t message_id, Bytes response);

  std::size_t entry_count() const;
  std::size_t peer_count() const { return peers_.size(); }
  double span() const { return span_; }

 private:
  struct Sighting {
    std::uint16_t message_id;
    double time;
    Bytes response;
  };
  struct Peer {
    std::deque<Sighting> ring;
    double last_seen = 0;
  };

  void expire(double now);

  double span_;
  std::size_t ring_size_;
  std::size_t max_peers_;
  std::map<std::string, Peer> peers_;
};

}  // namespace oscar::coap
