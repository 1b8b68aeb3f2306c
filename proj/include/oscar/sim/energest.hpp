#pragma once

#include <vector>

#include "oscar/sim/config.hpp"

namespace oscar::sim {

struct Interval {
  double begin = 0;
  double end = 0;
};

// Disjoint, sorted union of the given intervals clipped to [lo, hi].
std::vector<Interval> merge_intervals(std::vector<Interval> v, double lo, double hi);
double total_length(const std::vector<Interval>& v);

// Repeating on-window: on for `on` seconds every `period`, starting at `phase`.
struct PeriodicWindow {
  double period = 0;
  double phase = 0;
  double on = 0;

  bool active() const { return period > 0 && on > 0; }
  // Measure of on-time inside [a, b].
  double overlap(double a, double b) const;
};

// Seconds per hardware state for one node.
struct EnergestLedger {
  double cpu_active = 0;
  double cpu_lpm = 0;
  double radio_rx = 0;
  double radio_tx = 0;
  double duration = 0;

  double radio_off() const { return duration - radio_rx - radio_tx; }
  bool operator==(const EnergestLedger&) const = default;
};

struct ComponentEnergy {
  double cpu_active_j = 0;
  double cpu_lpm_j = 0;
  double radio_rx_j = 0;
  double radio_tx_j = 0;
  double radio_off_j = 0;

  double cpu_j() const { return cpu_active_j + cpu_lpm_j; }
  double radio_j() const { return radio_rx_j + radio_tx_j + radio_off_j; }
  double total_j() const { return cpu_j() + radio_j(); }
};

// E = sum over states of t_state * V * I_state.
ComponentEnergy account_energy(const EnergestLedger& ledger, const EnergyModel& model);

// Collects activity intervals for one node. The CPU is taken to be awake
// whenever the radio is on. TX wins over RX where they overlap.
class EnergestRecorder {
 public:
  void cpu(double begin, double end) { add(cpu_, begin, end); }
  void rx(double begin, double end) { add(rx_, begin, end); }
  void tx(double begin, double end) { add(tx_, begin, end); }
  void set_listen_schedule(PeriodicWindow w) { listen_ = w; }
  const PeriodicWindow& listen_schedule() const { return listen_; }

  EnergestLedger finalize(double duration) const;

 private:
  static void add(std::vector<Interval>& v, double begin, double end) {
    if (end > begin) v.push_back(Interval{begin, end});
  }

  std::vector<Interval> cpu_, rx_, tx_;
  PeriodicWindow listen_;
};

}  // namespace oscar::sim
