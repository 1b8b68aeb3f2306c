#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oscar/bytes.hpp"

// Flight-level model of a DTLS-PSK server with a fixed number of session
// slots. Records carry no cryptography; only the state transitions that
// drive radio traffic and slot contention are modelled.
namespace oscar::dtls {

inline constexpr std::size_t kDefaultMaxSlots = 3;
inline constexpr std::size_t kCookieBytes = 16;

enum class EventType {
  ClientHello,        // flight 1, no cookie
  ClientHelloCookie,  // flight 3, echoes the stateless cookie
  HandshakeContinue,  // flight 5: ClientKeyExchange, ChangeCipherSpec, Finished
  AppData,
  Timeout,
};

struct Event {
  EventType type = EventType::ClientHello;
  std::string peer;
  Bytes cookie;
};

enum class ActionType {
  HelloVerifyRequest,  // flight 2
  ServerHelloFlight,   // flight 4: ServerHello, ServerHelloDone
  FinishedFlight,      // flight 6: ChangeCipherSpec, Finished
  CloseAlert,
  DeliverAppData,
};

struct Action {
  ActionType type;
  std::string peer;
  Bytes cookie;

  bool operator==(const Action&) const = default;
};

struct Slot {
  std::string peer;
  double last_used_time = 0;
  bool established = false;
  bool occupied = false;

  bool operator==(const Slot&) const = default;
};

struct TableCounters {
  std::uint64_t cookies_issued = 0;
  std::uint64_t handshakes_started = 0;
  std::uint64_t handshakes_completed = 0;
  std::uint64_t evictions = 0;
  std::uint64_t dropped = 0;
  std::uint64_t reaped = 0;

  bool operator==(const TableCounters&) const = default;
};

class SessionTable {
 public:
  explicit SessionTable(std::size_t max_slots = kDefaultMaxSlots, Bytes cookie_secret = {},
                        double handshake_timeout_s = 60.0);

  // Unmatched cookie echoes and records for unknown sessions are dropped
  // silently (empty action list).
  std::vector<Action> handle(const Event& event, double now);

  const std::vector<Slot>& slots() const { return slots_; }
  std::optional<std::size_t> slot_of(const std::string& peer) const;
  bool is_established(const std::string& peer) const;
  std::size_t established_count() const;
  std::size_t occupied_count() const;
  const TableCounters& counters() const { return counters_; }
  const std::map<std::string, Bytes>& pending_cookies() const { return pending_cookies_; }
  std::size_t max_slots() const { return slots_.size(); }

  bool operator==(const SessionTable&) const = default;

 private:
  Bytes cookie_for(const std::string& peer) const;
  std::size_t claim_slot(const std::string& peer, double now, std::vector<Action>& actions);

  std::vector<Slot> slots_;
  Bytes cookie_secret_;
  double handshake_timeout_s_;
  std::map<std::string, Bytes> pending_cookies_;
  TableCounters counters_;
};

// Value-semantics form: returns the actions and the successor table.
std::pair<std::vector<Action>, SessionTable> handle(SessionTable table, const Event& event, double now);

}  // namespace oscar::dtls
