#include "oscar/sim/energest.hpp"

#include <algorithm>
#include <cmath>

namespace oscar::sim {

std::vector<Interval> merge_intervals(std::vector<Interval> v, double lo, double hi) {
  std::vector<Interval> out;
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  for (auto iv : v) {
    iv.begin = std::max(iv.begin, lo);
    iv.end = std::min(iv.end, hi);
    if (iv.end <= iv.begin) continue;
    if (!out.empty() && iv.begin <= out.back().end) {
      out.back().end = std::max(out.back().end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

double total_length(const std::vector<Interval>& v) {
  double sum = 0;
  for (const auto& iv : v) sum += iv.end - iv.begin;
  return sum;
}

double PeriodicWindow::overlap(double a, double b) const {
  if (!active() || b <= a) return 0;
  // Cumulative on-time from the phase origin up to u.
  auto cumulative = [this](double u) {
    const double k = std::floor(u / period);
    return k * on + std::min(u - k * period, on);
  };
  return cumulative(b - phase) - cumulative(a - phase);
}

ComponentEnergy account_energy(const EnergestLedger& t, const EnergyModel& m) {
  const double v = m.voltage_v / 1000.0;  // mA -> A
  ComponentEnergy e;
  e.cpu_active_j = t.cpu_active * v * m.cpu_active_ma;
  e.cpu_lpm_j = t.cpu_lpm * v * m.cpu_lpm_ma;
  e.radio_rx_j = t.radio_rx * v * m.radio_rx_ma;
  e.radio_tx_j = t.radio_tx * v * m.radio_tx_ma;
  e.radio_off_j = t.radio_off() * v * m.radio_off_ma;
  return e;
}

EnergestLedger EnergestRecorder::finalize(double duration) const {
  auto union_with_listen = [&](const std::vector<Interval>& merged) {
    double len = total_length(merged);
    if (!listen_.active()) return len;
    double overlap = 0;
    for (const auto& iv : merged) overlap += listen_.overlap(iv.begin, iv.end);
    return len + listen_.overlap(0, duration) - overlap;
  };

  const auto tx = merge_intervals(tx_, 0, duration);
  std::vector<Interval> radio = rx_;
  radio.insert(radio.end(), tx_.begin(), tx_.end());
  const auto radio_on = merge_intervals(radio, 0, duration);

  std::vector<Interval> awake = cpu_;
  awake.insert(awake.end(), radio.begin(), radio.end());
  const auto cpu_on = merge_intervals(std::move(awake), 0, duration);

  EnergestLedger l;
  l.duration = duration;
  l.radio_tx = total_length(tx);
  l.radio_rx = union_with_listen(radio_on) - l.radio_tx;
  l.cpu_active = union_with_listen(cpu_on);
  l.cpu_lpm = duration - l.cpu_active;
  return l;
}

}  // namespace oscar::sim
