#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oscar::sim {

enum class Mode { Oscar, DtlsPsk };
enum class MacType { AsyncLpl, BeaconEnabled };

std::string mode_name(Mode m);
std::string mac_name(MacType m);

struct EnergyModel {
  double voltage_v = 2.8;
  double cpu_active_ma = 0;
  double cpu_lpm_ma = 0;
  double radio_rx_ma = 0;
  double radio_tx_ma = 0;
  double radio_off_ma = 0;
};

struct MacConfig {
  MacType type = MacType::AsyncLpl;
  // Low-power listening (X-MAC style).
  double channel_check_hz = 8.0;
  double lpl_on_time_s = 1.0 / 160.0;
  double lpl_linger_s = 0.010;
  // Beacon-enabled 802.15.4.
  double beacon_interval_ms = 122.88;
  double superframe_ms = 15.36;
  std::size_t beacon_bytes = 20;
  std::size_t data_request_bytes = 10;
  // PHY.
  double bitrate_bps = 250000.0;
  std::size_t phy_overhead_bytes = 6;
  std::size_t mac_overhead_bytes = 21;
  std::size_t max_frame_bytes = 127;
  double loss_probability = 0.0;

  double check_interval_s() const { return 1.0 / channel_check_hz; }
  double beacon_interval_s() const { return beacon_interval_ms / 1000.0; }
  double superframe_s() const { return superframe_ms / 1000.0; }
  std::size_t max_payload_bytes() const { return max_frame_bytes - mac_overhead_bytes; }
};

struct CpuTimes {
  double sign_time_s = 0;
  double verify_time_s = 0;
  double aead_time_s = 0.005;
  double prf_time_s = 0.001;
  // Symmetric-only PSK handshake processing, summed over both server flights.
  double dtls_server_handshake_s = 0;
  double dtls_client_handshake_s = 0;
};

// Byte counts above the link layer (compressed IPv6/UDP included via net_header_bytes).
struct SizeModel {
  std::size_t signature_bytes = 40;
  std::size_t net_header_bytes = 10;
  std::size_t dtls_record_overhead = 21;
  std::size_t client_hello = 50;
  std::size_t hello_verify_request = 30;
  std::size_t client_hello_cookie = 66;
  std::size_t server_hello_flight = 60;
  std::size_t client_finished_flight = 49;
  std::size_t server_finished_flight = 29;
  std::size_t close_alert = 15;
  std::size_t grant_bytes = 120;
};

struct ScenarioConfig {
  std::string preset = "gen16";
  Mode mode = Mode::Oscar;
  std::size_t n_clients = 1;
  std::size_t max_slots = 3;
  MacConfig mac;
  double requests_per_min = 0.5;
  std::size_t payload_bytes = 25;
  double beta_s = 60.0;
  std::size_t n_resources = 1;
  double duration_s = 10800.0;
  EnergyModel energy;
  CpuTimes cpu_times;
  SizeModel sizes;
  double retransmit_timeout_s = 2.0;
  int max_transmissions = 4;
  double handshake_timeout_s = 60.0;
  // Each OSCAR client first fetches its grant over a handshake-equivalent exchange.
  bool authz_bootstrap = false;
  std::uint64_t rng_seed = 1;

  std::string producer_id = "prod-01";
  std::string resource_path = "/temp";
  std::string capability = "temperature-sensor";
};

// Throws Errc::ConfigInvalid naming the offending field.
void validate(const ScenarioConfig& cfg);

// "gen16": 16-bit MCU, older 802.15.4 transceiver, X-MAC.
// "gen32": 32-bit MCU, low-power prototype transceiver, beacon-enabled 802.15.4.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Sectioned key = value text; see docs/scenario-format.md.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniDocument parse(const std::string& text, const std::string& source = "<string>");
  static IniDocument load(const std::string& path);

  const Entry* find(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::map<std::string, Entry>>& sections() const { return sections_; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

// Mandatory: scenario.preset, scenario.mode, scenario.n_clients. Every other
// field defaults from the preset. Unknown keys are rejected.
ScenarioConfig scenario_from_ini(const IniDocument& doc);
ScenarioConfig load_scenario(const std::string& path);
std::string to_ini(const ScenarioConfig& cfg);

}  // namespace oscar::sim
