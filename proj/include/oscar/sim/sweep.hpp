#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oscar/sim/simulator.hpp"

namespace oscar::sim {

struct SweepStat {
  double mean = 0;
  double ci95 = 0;  // half-width, Student t with n-1 degrees of freedom
};

SweepStat summarize(const std::vector<double>& samples);

struct SweepPoint {
  std::size_t n_clients = 0;
  double ratio = 0;  // n_clients / max_slots
  SweepStat oscar_server_j;
  SweepStat dtls_server_j;
  SweepStat oscar_latency_s;
  SweepStat dtls_latency_s;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<MetricsReport> runs;  // count-major, then mode (OSCAR first), then seed
  // First ratio at which mean OSCAR server energy drops below DTLS, by linear
  // interpolation between neighbouring ratios. Empty when no sign change.
  std::optional<double> crossover_ratio;
};

// Paired runs per client count: both modes share each seed, seeds are
// base.rng_seed, base.rng_seed + 1, ...
SweepResult sweep_crossover(const ScenarioConfig& base, const std::vector<std::size_t>& client_counts,
                            std::size_t seeds = 5);

// Crossover of two sampled curves over the same x values.
std::optional<double> interpolate_crossover(const std::vector<double>& x, const std::vector<double>& oscar,
                                            const std::vector<double>& dtls);

std::string format_crossover(const SweepResult& r);

}  // namespace oscar::sim
