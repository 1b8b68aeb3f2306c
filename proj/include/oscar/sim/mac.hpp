#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "oscar/sim/config.hpp"
#include "oscar/sim/energest.hpp"

namespace oscar::sim {

// Per-node radio state the MAC models read and update.
struct RadioState {
  double wake_phase = 0;  // first channel check (LPL)
  // Interval during which the radio is known to be listening outside its schedule.
  double awake_begin = std::numeric_limits<double>::infinity();
  double awake_until = -std::numeric_limits<double>::infinity();
  double tx_free_at = 0;
};

// What one hop costs and when it completes.
struct HopTiming {
  double start = 0;          // sender begins (strobe or first frame)
  double access_delay = 0;   // start -> first data bit on air
  double delivery_time = 0;  // last bit of last frame received
  std::vector<Interval> sender_tx, sender_rx, receiver_tx, receiver_rx;
};

// On-air time of one 802.15.4 frame carrying `payload_bytes` above the MAC header.
double airtime(const MacConfig& mac, std::size_t payload_bytes);
// Splits a network-layer message into link frames.
std::vector<std::size_t> fragment(const MacConfig& mac, std::size_t message_bytes);

// Low-power listening with strobed preambles: the receiver samples the
// channel every 1/channel_check_hz; the sender strobes until the receiver's
// next sample, then sends the frames back to back. A receiver stays awake for
// lpl_linger_s after a reception, so a frame sent within that window is not
// strobed.
HopTiming mac_async_lpl(const MacConfig& mac, const std::vector<std::size_t>& frames,
                        RadioState& sender, RadioState& receiver, double now);
double lpl_next_wake(const MacConfig& mac, const RadioState& receiver, double t);
PeriodicWindow lpl_listen_schedule(const MacConfig& mac, const RadioState& node);

// Beacon-enabled 802.15.4, star around a PAN coordinator. Every node listens
// during the active superframe [k*BI, k*BI + SD). Device -> coordinator frames
// go direct in the contention access period, in the current superframe when
// the frame still fits. Coordinator -> device frames are indirect: announced
// in the next beacon, then polled with a data request.
enum class BeaconDirection { ToCoordinator, FromCoordinator };

HopTiming mac_beacon_enabled(const MacConfig& mac, const std::vector<std::size_t>& frames,
                             BeaconDirection direction, RadioState& sender, RadioState& receiver,
                             double now);
double beacon_next_start(const MacConfig& mac, double t);
// Earliest time >= t at which a frame of duration d fits inside a contention access period.
double beacon_cap_slot(const MacConfig& mac, double t, double d);
PeriodicWindow beacon_listen_schedule(const MacConfig& mac);

}  // namespace oscar::sim
