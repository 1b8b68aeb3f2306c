#include "oscar/sim/mac.hpp"

#include <algorithm>
#include <cmath>

namespace oscar::sim {

double airtime(const MacConfig& mac, std::size_t payload_bytes) {
  const double bytes = static_cast<double>(mac.phy_overhead_bytes + mac.mac_overhead_bytes + payload_bytes);
  return bytes * 8.0 / mac.bitrate_bps;
}

std::vector<std::size_t> fragment(const MacConfig& mac, std::size_t message_bytes) {
  const std::size_t room = mac.max_payload_bytes();
  std::vector<std::size_t> frames;
  if (message_bytes == 0) return {0};
  while (message_bytes > 0) {
    const std::size_t n = std::min(room, message_bytes);
    frames.push_back(n);
    message_bytes -= n;
  }
  return frames;
}

double lpl_next_wake(const MacConfig& mac, const RadioState& receiver, double t) {
  const double period = mac.check_interval_s();
  const double k = std::ceil((t - receiver.wake_phase) / period);
  return receiver.wake_phase + k * period;
}

PeriodicWindow lpl_listen_schedule(const MacConfig& mac, const RadioState& node) {
  return PeriodicWindow{mac.check_interval_s(), node.wake_phase, mac.lpl_on_time_s};
}

HopTiming mac_async_lpl(const MacConfig& mac, const std::vector<std::size_t>& frames,
                        RadioState& sender, RadioState& receiver, double now) {
  HopTiming h;
  h.start = std::max(now, sender.tx_free_at);
  const bool awake = receiver.awake_begin <= h.start && h.start <= receiver.awake_until;
  const double wake = awake ? h.start : lpl_next_wake(mac, receiver, h.start);
  h.access_delay = wake - h.start;
  if (wake > h.start) h.sender_tx.push_back(Interval{h.start, wake});

  double cursor = wake;
  for (std::size_t bytes : frames) {
    const double a = airtime(mac, bytes);
    h.sender_tx.push_back(Interval{cursor, cursor + a});
    h.receiver_rx.push_back(Interval{cursor, cursor + a});
    cursor += a;
  }
  h.delivery_time = cursor;
  sender.tx_free_at = cursor;
  receiver.awake_begin = wake;
  receiver.awake_until = cursor + mac.lpl_linger_s;
  return h;
}

double beacon_next_start(const MacConfig& mac, double t) {
  const double bi = mac.beacon_interval_s();
  return (std::floor(t / bi) + 1.0) * bi;
}

double beacon_cap_slot(const MacConfig& mac, double t, double d) {
  const double bi = mac.beacon_interval_s();
  const double cap_begin = airtime(mac, mac.beacon_bytes);
  const double cap_end = mac.superframe_s();
  double k = std::floor(t / bi);
  for (int guard = 0; guard < 4; ++guard, k += 1.0) {
    const double begin = std::max(t, k * bi + cap_begin);
    if (begin + d <= k * bi + cap_end) return begin;
  }
  // Frame longer than a CAP: send at the start of the next one regardless.
  return k * bi + cap_begin;
}

PeriodicWindow beacon_listen_schedule(const MacConfig& mac) {
  return PeriodicWindow{mac.beacon_interval_s(), 0.0, mac.superframe_s()};
}

HopTiming mac_beacon_enabled(const MacConfig& mac, const std::vector<std::size_t>& frames,
                             BeaconDirection direction, RadioState& sender, RadioState& receiver,
                             double now) {
  HopTiming h;
  h.start = std::max(now, sender.tx_free_at);
  double cursor = h.start;

  if (direction == BeaconDirection::FromCoordinator) {
    // Pending-data flag rides in the next beacon; the device then polls.
    const double beacon = beacon_next_start(mac, h.start);
    const double dr = airtime(mac, mac.data_request_bytes);
    const double poll = beacon_cap_slot(mac, beacon, dr);
    h.receiver_tx.push_back(Interval{poll, poll + dr});
    h.sender_rx.push_back(Interval{poll, poll + dr});
    cursor = poll + dr;
    receiver.tx_free_at = std::max(receiver.tx_free_at, cursor);
  }

  bool first = true;
  for (std::size_t bytes : frames) {
    const double a = airtime(mac, bytes);
    const double at = beacon_cap_slot(mac, cursor, a);
    if (first) {
      h.access_delay = at - h.start;
      first = false;
    }
    h.sender_tx.push_back(Interval{at, at + a});
    h.receiver_rx.push_back(Interval{at, at + a});
    cursor = at + a;
  }
  h.delivery_time = cursor;
  sender.tx_free_at = cursor;
  return h;
}

}  // namespace oscar::sim
