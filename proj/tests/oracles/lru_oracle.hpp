#pragma once

#include <random>
#include <string>
#include <vector>

#include "oscar/dtls.hpp"

// Reference model of the session table, written from the slot rules alone:
// a verified cookie echo claims the peer's own slot, else the lowest free
// slot, else the least recently used one (lowest index on ties).
namespace oscar::testing {

struct OracleSlot {
  bool occupied = false;
  std::string peer;
  double last_used = 0;
  bool established = false;
};

struct LruOracle {
  std::vector<OracleSlot> slots;
  double timeout;
  std::vector<std::string> evicted;

  LruOracle(std::size_t n, double timeout_s) : slots(n), timeout(timeout_s) {}

  int find(const std::string& peer) const {
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i].occupied && slots[i].peer == peer) return static_cast<int>(i);
    return -1;
  }

  // Returns true when the event was accepted.
  bool cookie_echo(const std::string& peer, double now) {
    int i = find(peer);
    if (i < 0)
      for (std::size_t k = 0; k < slots.size() && i < 0; ++k)
        if (!slots[k].occupied) i = static_cast<int>(k);
    if (i < 0) {
      i = 0;
      for (std::size_t k = 1; k < slots.size(); ++k)
        if (slots[k].last_used < slots[static_cast<std::size_t>(i)].last_used) i = static_cast<int>(k);
      evicted.push_back(slots[static_cast<std::size_t>(i)].peer);
    }
    slots[static_cast<std::size_t>(i)] = OracleSlot{true, peer, now, false};
    return true;
  }
  bool finish(const std::string& peer, double now) {
    const int i = find(peer);
    if (i < 0) return false;
    auto& s = slots[static_cast<std::size_t>(i)];
    if (!s.established) {
      s.established = true;
      s.last_used = now;
    }
    return true;
  }
  bool app_data(const std::string& peer, double now) {
    const int i = find(peer);
    if (i < 0 || !slots[static_cast<std::size_t>(i)].established) return false;
    slots[static_cast<std::size_t>(i)].last_used = now;
    return true;
  }
  void reap(double now) {
    for (auto& s : slots)
      if (s.occupied && !s.established && now - s.last_used >= timeout) s = OracleSlot{};
  }
};

struct LruCheck {
  bool matched = true;
  bool evicted_without_cookie = false;
  std::string first_mismatch;
};

// Drives table and oracle with the same random sequence of `steps` events
// over `peers` clients.
inline LruCheck run_lru_sequence(std::uint64_t seed, std::size_t max_slots, std::size_t peers, int steps) {
  std::mt19937_64 rng(seed);
  dtls::SessionTable table(max_slots, {}, 60.0);
  LruOracle oracle(max_slots, 60.0);
  dtls::SessionTable probe(max_slots, {}, 60.0);
  std::uniform_int_distribution<std::size_t> pick(0, peers - 1);
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_real_distribution<double> gap(0.0, 30.0);
  LruCheck out;
  double now = 0;

  auto mismatch = [&](const std::string& what) {
    if (out.matched) out.first_mismatch = what + " at t=" + std::to_string(now);
    out.matched = false;
  };

  for (int step = 0; step < steps && out.matched; ++step) {
    now += gap(rng);
    const std::string peer = "peer-" + std::to_string(pick(rng));
    const int k = kind(rng);
    dtls::Event ev;
    ev.peer = peer;
    bool expect_accept = true;
    const auto evictions_before = oracle.evicted.size();
    if (k <= 1) {
      ev.type = dtls::EventType::ClientHello;
    } else if (k <= 3) {
      ev.type = dtls::EventType::ClientHelloCookie;
      // The cookie from a hello exchange with a throwaway table: stateless, so it matches.
      ev.cookie = probe.handle(dtls::Event{dtls::EventType::ClientHello, peer, {}}, now).front().cookie;
      oracle.cookie_echo(peer, now);
    } else if (k == 4) {
      ev.type = dtls::EventType::ClientHelloCookie;
      ev.cookie = Bytes(dtls::kCookieBytes, 0xEE);
      expect_accept = false;
    } else if (k <= 6) {
      ev.type = dtls::EventType::HandshakeContinue;
      expect_accept = oracle.finish(peer, now);
    } else if (k <= 8) {
      ev.type = dtls::EventType::AppData;
      expect_accept = oracle.app_data(peer, now);
    } else {
      ev.type = dtls::EventType::Timeout;
      oracle.reap(now);
    }

    const auto slots_before = table.slots();
    const auto actions = table.handle(ev, now);
    std::size_t alerts = 0;
    for (const auto& a : actions) alerts += a.type == dtls::ActionType::CloseAlert;

    const bool is_echo = ev.type == dtls::EventType::ClientHelloCookie && expect_accept;
    if (!is_echo && (alerts > 0 || (ev.type != dtls::EventType::Timeout && ev.type != dtls::EventType::HandshakeContinue &&
                                    ev.type != dtls::EventType::AppData && table.slots() != slots_before)))
      out.evicted_without_cookie = true;
    if (alerts != oracle.evicted.size() - evictions_before) mismatch("eviction count");
    if (alerts == 1 && actions.front().peer != oracle.evicted.back()) mismatch("eviction victim");
    if (ev.type != dtls::EventType::ClientHello && ev.type != dtls::EventType::Timeout &&
        actions.empty() == expect_accept)
      mismatch("accept/drop");

    for (std::size_t i = 0; i < max_slots; ++i) {
      const auto& a = table.slots()[i];
      const auto& b = oracle.slots[i];
      if (a.occupied != b.occupied || (a.occupied && (a.peer != b.peer || a.established != b.established ||
                                                      a.last_used_time != b.last_used)))
        mismatch("slot " + std::to_string(i));
    }
  }
  return out;
}

}  // namespace oscar::testing
