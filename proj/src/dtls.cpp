#include "oscar/dtls.hpp"

#include <algorithm>

#include "oscar/crypto.hpp"

namespace oscar::dtls {

SessionTable::SessionTable(std::size_t max_slots, Bytes cookie_secret, double handshake_timeout_s)
    : slots_(max_slots), cookie_secret_(std::move(cookie_secret)), handshake_timeout_s_(handshake_timeout_s) {
  if (max_slots == 0) throw Error(Errc::ConfigInvalid, "need at least one session slot");
  if (cookie_secret_.empty()) cookie_secret_ = to_bytes("dtls-cookie-secret");
}

Bytes SessionTable::cookie_for(const std::string& peer) const {
  const auto mac = crypto::hmac_sha256(cookie_secret_, to_bytes(peer));
  return Bytes(mac.begin(), mac.begin() + kCookieBytes);
}

std::optional<std::size_t> SessionTable::slot_of(const std::string& peer) const {
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].occupied && slots_[i].peer == peer) return i;
  return std::nullopt;
}

bool SessionTable::is_established(const std::string& peer) const {
  auto i = slot_of(peer);
  return i && slots_[*i].established;
}

std::size_t SessionTable::established_count() const {
  return static_cast<std::size_t>(
      std::count_if(slots_.begin(), slots_.end(), [](const Slot& s) { return s.occupied && s.established; }));
}

std::size_t SessionTable::occupied_count() const {
  return static_cast<std::size_t>(
      std::count_if(slots_.begin(), slots_.end(), [](const Slot& s) { return s.occupied; }));
}

std::size_t SessionTable::claim_slot(const std::string& peer, double now, std::vector<Action>& actions) {
  std::size_t index;
  if (auto own = slot_of(peer)) {
    index = *own;
  } else if (auto free = std::find_if(slots_.begin(), slots_.end(), [](const Slot& s) { return !s.occupied; });
             free != slots_.end()) {
    index = static_cast<std::size_t>(free - slots_.begin());
  } else {
    // LRU victim; strict < keeps the lowest index on ties.
    index = 0;
    for (std::size_t i = 1; i < slots_.size(); ++i)
      if (slots_[i].last_used_time < slots_[index].last_used_time) index = i;
    actions.push_back(Action{ActionType::CloseAlert, slots_[index].peer, {}});
    ++counters_.evictions;
  }
  slots_[index] = Slot{peer, now, false, true};
  return index;
}

std::vector<Action> SessionTable::handle(const Event& event, double now) {
  std::vector<Action> actions;
  switch (event.type) {
    case EventType::ClientHello: {
      Bytes cookie = cookie_for(event.peer);
      pending_cookies_[event.peer] = cookie;
      ++counters_.cookies_issued;
      actions.push_back(Action{ActionType::HelloVerifyRequest, event.peer, std::move(cookie)});
      break;
    }
    case EventType::ClientHelloCookie: {
      // The cookie is stateless: any echo matching the keyed MAC of the peer
      // is good, which also makes retransmitted flight 3 idempotent.
      if (event.cookie != cookie_for(event.peer)) {
        ++counters_.dropped;
        break;
      }
      pending_cookies_.erase(event.peer);
      claim_slot(event.peer, now, actions);
      ++counters_.handshakes_started;
      actions.push_back(Action{ActionType::ServerHelloFlight, event.peer, {}});
      break;
    }
    case EventType::HandshakeContinue: {
      auto i = slot_of(event.peer);
      if (!i) {
        ++counters_.dropped;
        break;
      }
      if (slots_[*i].established) {
        // Retransmitted flight 5: repeat flight 6.
        actions.push_back(Action{ActionType::FinishedFlight, event.peer, {}});
        break;
      }
      slots_[*i].established = true;
      slots_[*i].last_used_time = now;
      ++counters_.handshakes_completed;
      actions.push_back(Action{ActionType::FinishedFlight, event.peer, {}});
      break;
    }
    case EventType::AppData: {
      auto i = slot_of(event.peer);
      if (!i || !slots_[*i].established) {
        ++counters_.dropped;
        break;
      }
      slots_[*i].last_used_time = now;
      actions.push_back(Action{ActionType::DeliverAppData, event.peer, {}});
      break;
    }
    case EventType::Timeout: {
      for (auto& s : slots_) {
        if (s.occupied && !s.established && now - s.last_used_time >= handshake_timeout_s_) {
          s = Slot{};
          ++counters_.reaped;
        }
      }
      break;
    }
  }
  return actions;
}

std::pair<std::vector<Action>, SessionTable> handle(SessionTable table, const Event& event, double now) {
  auto actions = table.handle(event, now);
  return {std::move(actions), std::move(table)};
}

}  // namespace oscar::dtls
