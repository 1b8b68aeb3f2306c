#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oscar/sim/config.hpp"
#include "oscar/sim/energest.hpp"

namespace oscar::sim {

struct NodeReport {
  EnergestLedger ledger;
  ComponentEnergy energy;
};

struct MetricsReport {
  Mode mode = Mode::Oscar;
  std::size_t n_clients = 0;
  std::size_t max_slots = 0;
  double beta_s = 0;
  std::uint64_t seed = 0;
  double duration_s = 0;

  NodeReport server;
  std::vector<NodeReport> clients;
  double server_total_j = 0;
  double server_cpu_j = 0;
  double server_radio_j = 0;
  // Energy above an idle duty-cycling node, summed over clients, per completed request.
  double client_mean_j_per_req = 0;

  std::vector<double> latencies_s;
  double latency_mean_s = 0;
  double latency_p95_s = 0;

  std::uint64_t requests_issued = 0;
  std::uint64_t requests_completed = 0;
  std::uint64_t requests_failed = 0;
  std::uint64_t handshakes = 0;
  std::uint64_t evictions = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t signatures = 0;
  std::uint64_t verifications = 0;
  std::uint64_t frames_sent = 0;
  // Mean gap between consecutive request arrivals at the same client.
  double mean_interarrival_s = 0;
};

// Deterministic for a fixed cfg (including rng_seed). Throws ConfigInvalid.
MetricsReport run_scenario(const ScenarioConfig& cfg);

inline constexpr const char* kCsvHeader =
    "mode,n_clients,max_slots,beta_s,seed,server_total_j,server_cpu_j,server_radio_j,"
    "client_mean_j_per_req,latency_mean_s,latency_p95_s,handshakes,evictions,signatures,verifications";

std::string csv_row(const MetricsReport& r);
// Every field, full precision; equal strings mean equal reports.
std::string serialize(const MetricsReport& r);

}  // namespace oscar::sim
