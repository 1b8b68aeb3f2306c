#include "oscar/sim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "oscar/error.hpp"

namespace oscar::sim {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::ConfigInvalid, what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& field) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out))
    invalid(field + ": expected a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& v, const std::string& field) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    invalid(field + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v, const std::string& field) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  invalid(field + ": expected true/false, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(ScenarioConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

template <typename Getter>
Field real(std::string section, std::string key, Getter member) {
  return Field{section, key,
               [member](ScenarioConfig& c, const std::string& v, const std::string& f) {
                 member(c) = parse_double(v, f);
               },
               [member](const ScenarioConfig& c) { return fmt(member(const_cast<ScenarioConfig&>(c))); }};
}

template <typename Getter>
Field count(std::string section, std::string key, Getter member) {
  return Field{section, key,
               [member](ScenarioConfig& c, const std::string& v, const std::string& f) {
                 using T = std::remove_reference_t<decltype(member(c))>;
                 member(c) = static_cast<T>(parse_uint(v, f));
               },
               [member](const ScenarioConfig& c) {
                 return std::to_string(member(const_cast<ScenarioConfig&>(c)));
               }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    t.push_back(Field{"scenario", "preset",
                      [](ScenarioConfig& c, const std::string& v, const std::string&) { c.preset = v; },
                      [](const ScenarioConfig& c) { return c.preset; }});
    t.push_back(Field{"scenario", "mode",
                      [](ScenarioConfig& c, const std::string& v, const std::string& f) {
                        if (v == "oscar") c.mode = Mode::Oscar;
                        else if (v == "dtls") c.mode = Mode::DtlsPsk;
                        else invalid(f + ": expected oscar|dtls, got '" + v + "'");
                      },
                      [](const ScenarioConfig& c) { return mode_name(c.mode); }});
    t.push_back(count("scenario", "n_clients", [](ScenarioConfig& c) -> auto& { return c.n_clients; }));
    t.push_back(count("scenario", "max_slots", [](ScenarioConfig& c) -> auto& { return c.max_slots; }));
    t.push_back(real("scenario", "requests_per_min", [](ScenarioConfig& c) -> auto& { return c.requests_per_min; }));
    t.push_back(count("scenario", "payload_bytes", [](ScenarioConfig& c) -> auto& { return c.payload_bytes; }));
    t.push_back(real("scenario", "beta_s", [](ScenarioConfig& c) -> auto& { return c.beta_s; }));
    t.push_back(count("scenario", "n_resources", [](ScenarioConfig& c) -> auto& { return c.n_resources; }));
    t.push_back(real("scenario", "duration_s", [](ScenarioConfig& c) -> auto& { return c.duration_s; }));
    t.push_back(real("scenario", "retransmit_timeout_s", [](ScenarioConfig& c) -> auto& { return c.retransmit_timeout_s; }));
    t.push_back(count("scenario", "max_transmissions", [](ScenarioConfig& c) -> auto& { return c.max_transmissions; }));
    t.push_back(real("scenario", "handshake_timeout_s", [](ScenarioConfig& c) -> auto& { return c.handshake_timeout_s; }));
    t.push_back(Field{"scenario", "authz_bootstrap",
                      [](ScenarioConfig& c, const std::string& v, const std::string& f) { c.authz_bootstrap = parse_bool(v, f); },
                      [](const ScenarioConfig& c) { return std::string(c.authz_bootstrap ? "true" : "false"); }});
    t.push_back(count("scenario", "rng_seed", [](ScenarioConfig& c) -> auto& { return c.rng_seed; }));

    t.push_back(Field{"mac", "type",
                      [](ScenarioConfig& c, const std::string& v, const std::string& f) {
                        if (v == "async_lpl") c.mac.type = MacType::AsyncLpl;
                        else if (v == "beacon") c.mac.type = MacType::BeaconEnabled;
                        else invalid(f + ": expected async_lpl|beacon, got '" + v + "'");
                      },
                      [](const ScenarioConfig& c) { return mac_name(c.mac.type); }});
    t.push_back(real("mac", "channel_check_hz", [](ScenarioConfig& c) -> auto& { return c.mac.channel_check_hz; }));
    t.push_back(real("mac", "lpl_on_time_s", [](ScenarioConfig& c) -> auto& { return c.mac.lpl_on_time_s; }));
    t.push_back(real("mac", "lpl_linger_s", [](ScenarioConfig& c) -> auto& { return c.mac.lpl_linger_s; }));
    t.push_back(real("mac", "beacon_interval_ms", [](ScenarioConfig& c) -> auto& { return c.mac.beacon_interval_ms; }));
    t.push_back(real("mac", "superframe_ms", [](ScenarioConfig& c) -> auto& { return c.mac.superframe_ms; }));
    t.push_back(count("mac", "beacon_bytes", [](ScenarioConfig& c) -> auto& { return c.mac.beacon_bytes; }));
    t.push_back(count("mac", "data_request_bytes", [](ScenarioConfig& c) -> auto& { return c.mac.data_request_bytes; }));
    t.push_back(real("mac", "bitrate_bps", [](ScenarioConfig& c) -> auto& { return c.mac.bitrate_bps; }));
    t.push_back(count("mac", "phy_overhead_bytes", [](ScenarioConfig& c) -> auto& { return c.mac.phy_overhead_bytes; }));
    t.push_back(count("mac", "mac_overhead_bytes", [](ScenarioConfig& c) -> auto& { return c.mac.mac_overhead_bytes; }));
    t.push_back(count("mac", "max_frame_bytes", [](ScenarioConfig& c) -> auto& { return c.mac.max_frame_bytes; }));
    t.push_back(real("mac", "loss_probability", [](ScenarioConfig& c) -> auto& { return c.mac.loss_probability; }));

    t.push_back(real("energy", "voltage_v", [](ScenarioConfig& c) -> auto& { return c.energy.voltage_v; }));
    t.push_back(real("energy", "cpu_active_ma", [](ScenarioConfig& c) -> auto& { return c.energy.cpu_active_ma; }));
    t.push_back(real("energy", "cpu_lpm_ma", [](ScenarioConfig& c) -> auto& { return c.energy.cpu_lpm_ma; }));
    t.push_back(real("energy", "radio_rx_ma", [](ScenarioConfig& c) -> auto& { return c.energy.radio_rx_ma; }));
    t.push_back(real("energy", "radio_tx_ma", [](ScenarioConfig& c) -> auto& { return c.energy.radio_tx_ma; }));
    t.push_back(real("energy", "radio_off_ma", [](ScenarioConfig& c) -> auto& { return c.energy.radio_off_ma; }));

    t.push_back(real("cpu", "sign_time_s", [](ScenarioConfig& c) -> auto& { return c.cpu_times.sign_time_s; }));
    t.push_back(real("cpu", "verify_time_s", [](ScenarioConfig& c) -> auto& { return c.cpu_times.verify_time_s; }));
    t.push_back(real("cpu", "aead_time_s", [](ScenarioConfig& c) -> auto& { return c.cpu_times.aead_time_s; }));
    t.push_back(real("cpu", "prf_time_s", [](ScenarioConfig& c) -> auto& { return c.cpu_times.prf_time_s; }));
    t.push_back(real("cpu", "dtls_server_handshake_s", [](ScenarioConfig& c) -> auto& { return c.cpu_times.dtls_server_handshake_s; }));
    t.push_back(real("cpu", "dtls_client_handshake_s", [](ScenarioConfig& c) -> auto& { return c.cpu_times.dtls_client_handshake_s; }));

    t.push_back(count("sizes", "signature_bytes", [](ScenarioConfig& c) -> auto& { return c.sizes.signature_bytes; }));
    t.push_back(count("sizes", "net_header_bytes", [](ScenarioConfig& c) -> auto& { return c.sizes.net_header_bytes; }));
    t.push_back(count("sizes", "dtls_record_overhead", [](ScenarioConfig& c) -> auto& { return c.sizes.dtls_record_overhead; }));
    t.push_back(count("sizes", "client_hello", [](ScenarioConfig& c) -> auto& { return c.sizes.client_hello; }));
    t.push_back(count("sizes", "hello_verify_request", [](ScenarioConfig& c) -> auto& { return c.sizes.hello_verify_request; }));
    t.push_back(count("sizes", "client_hello_cookie", [](ScenarioConfig& c) -> auto& { return c.sizes.client_hello_cookie; }));
    t.push_back(count("sizes", "server_hello_flight", [](ScenarioConfig& c) -> auto& { return c.sizes.server_hello_flight; }));
    t.push_back(count("sizes", "client_finished_flight", [](ScenarioConfig& c) -> auto& { return c.sizes.client_finished_flight; }));
    t.push_back(count("sizes", "server_finished_flight", [](ScenarioConfig& c) -> auto& { return c.sizes.server_finished_flight; }));
    t.push_back(count("sizes", "close_alert", [](ScenarioConfig& c) -> auto& { return c.sizes.close_alert; }));
    t.push_back(count("sizes", "grant_bytes", [](ScenarioConfig& c) -> auto& { return c.sizes.grant_bytes; }));

    t.push_back(Field{"nodes", "producer_id",
                      [](ScenarioConfig& c, const std::string& v, const std::string&) { c.producer_id = v; },
                      [](const ScenarioConfig& c) { return c.producer_id; }});
    t.push_back(Field{"nodes", "resource_path",
                      [](ScenarioConfig& c, const std::string& v, const std::string&) { c.resource_path = v; },
                      [](const ScenarioConfig& c) { return c.resource_path; }});
    t.push_back(Field{"nodes", "capability",
                      [](ScenarioConfig& c, const std::string& v, const std::string&) { c.capability = v; },
                      [](const ScenarioConfig& c) { return c.capability; }});
    return t;
  }();
  return table;
}

}  // namespace

std::string mode_name(Mode m) { return m == Mode::Oscar ? "oscar" : "dtls"; }
std::string mac_name(MacType m) { return m == MacType::AsyncLpl ? "async_lpl" : "beacon"; }

void validate(const ScenarioConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) invalid(std::string(name) + " must be positive");
  };
  if (c.n_clients < 1) invalid("scenario.n_clients must be >= 1");
  if (c.max_slots < 1) invalid("scenario.max_slots must be >= 1");
  if (c.n_resources < 1) invalid("scenario.n_resources must be >= 1");
  if (c.max_transmissions < 1) invalid("scenario.max_transmissions must be >= 1");
  positive(c.duration_s, "scenario.duration_s");
  positive(c.requests_per_min, "scenario.requests_per_min");
  positive(c.beta_s, "scenario.beta_s");
  positive(c.retransmit_timeout_s, "scenario.retransmit_timeout_s");
  positive(c.handshake_timeout_s, "scenario.handshake_timeout_s");
  positive(c.mac.bitrate_bps, "mac.bitrate_bps");
  positive(c.mac.channel_check_hz, "mac.channel_check_hz");
  positive(c.mac.lpl_on_time_s, "mac.lpl_on_time_s");
  positive(c.mac.beacon_interval_ms, "mac.beacon_interval_ms");
  positive(c.mac.superframe_ms, "mac.superframe_ms");
  positive(c.energy.voltage_v, "energy.voltage_v");
  if (c.mac.lpl_on_time_s >= c.mac.check_interval_s()) invalid("mac.lpl_on_time_s must be below the check interval");
  if (c.mac.superframe_ms > c.mac.beacon_interval_ms) invalid("mac.superframe_ms exceeds mac.beacon_interval_ms");
  if (c.mac.lpl_linger_s < 0) invalid("mac.lpl_linger_s must be >= 0");
  if (c.mac.max_frame_bytes <= c.mac.mac_overhead_bytes) invalid("mac.max_frame_bytes must exceed mac.mac_overhead_bytes");
  if (c.mac.loss_probability < 0 || c.mac.loss_probability >= 1) invalid("mac.loss_probability must be in [0, 1)");
  const auto& e = c.energy;
  for (double v : {e.cpu_active_ma, e.cpu_lpm_ma, e.radio_rx_ma, e.radio_tx_ma, e.radio_off_ma})
    if (v < 0) invalid("energy currents must be >= 0");
  if (e.radio_off_ma > e.radio_rx_ma) invalid("energy.radio_off_ma must not exceed energy.radio_rx_ma");
  const auto& t = c.cpu_times;
  for (double v : {t.sign_time_s, t.verify_time_s, t.aead_time_s, t.prf_time_s, t.dtls_server_handshake_s,
                   t.dtls_client_handshake_s})
    if (v < 0) invalid("cpu times must be >= 0");
  if (c.payload_bytes == 0 || c.payload_bytes > 1024) invalid("scenario.payload_bytes must be in 1..1024");
  if (c.producer_id.empty() || c.producer_id.size() > 32) invalid("nodes.producer_id must be 1..32 bytes");
  if (c.resource_path.empty() || c.resource_path[0] != '/') invalid("nodes.resource_path must start with '/'");
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.preset = name;
  if (name == "gen16") {
    // WiSMote class: MSP430F5 at 21.3 MHz, CC2520. Representative data-sheet
    // figures, non-normative.
    c.mac.type = MacType::AsyncLpl;
    c.energy = EnergyModel{2.8, 5.0, 0.0024, 18.5, 25.8, 0.0003};
    c.cpu_times.sign_time_s = 1.18;
    c.cpu_times.verify_time_s = 2.36;
    c.cpu_times.dtls_server_handshake_s = 0.6;
    c.cpu_times.dtls_client_handshake_s = 0.6;
  } else if (name == "gen32") {
    // ST GreenNet class: STM32L at 21.3 MHz (29.7% above the MSP430 active
    // draw), low-power prototype transceiver. Non-normative.
    c.mac.type = MacType::BeaconEnabled;
    c.energy = EnergyModel{2.8, 6.485, 0.0045, 5.4, 6.4, 0.0003};
    c.cpu_times.sign_time_s = 0.3;
    c.cpu_times.verify_time_s = 0.6;
    c.cpu_times.dtls_server_handshake_s = 0.15;
    c.cpu_times.dtls_client_handshake_s = 0.15;
  } else {
    invalid("unknown preset '" + name + "' (expected gen16 or gen32)");
  }
  return c;
}

std::vector<std::string> preset_names() { return {"gen16", "gen32"}; }

IniDocument IniDocument::parse(const std::string& text, const std::string& source) {
  IniDocument doc;
  doc.source_ = source;
  std::istringstream is(text);
  std::string section;
  int line_no = 0;
  for (std::string raw; std::getline(is, raw);) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') invalid(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) invalid(where + "empty section name");
      doc.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) invalid(where + "expected key = value");
    if (section.empty()) invalid(where + "key outside of any section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) invalid(where + "empty key");
    auto& entries = doc.sections_[section];
    if (entries.contains(key)) invalid(where + "duplicate key " + section + "." + key);
    entries[key] = Entry{value, line_no};
  }
  return doc;
}

IniDocument IniDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const IniDocument::Entry* IniDocument::find(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

ScenarioConfig scenario_from_ini(const IniDocument& doc) {
  for (const char* key : {"preset", "mode", "n_clients"})
    if (!doc.find("scenario", key))
      invalid(doc.source() + ": missing mandatory field scenario." + key);

  ScenarioConfig cfg = preset(doc.find("scenario", "preset")->value);
  const auto& table = fields();
  for (const auto& [section, entries] : doc.sections()) {
    for (const auto& [key, entry] : entries) {
      auto f = std::find_if(table.begin(), table.end(),
                            [&](const Field& x) { return x.section == section && x.key == key; });
      const std::string name = section + "." + key;
      if (f == table.end())
        invalid(doc.source() + ":" + std::to_string(entry.line) + ": unknown field " + name);
      try {
        f->set(cfg, entry.value, name);
      } catch (const Error& e) {
        invalid(doc.source() + ":" + std::to_string(entry.line) + ": " + e.detail());
      }
    }
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) { return scenario_from_ini(IniDocument::load(path)); }

std::string to_ini(const ScenarioConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) os << "\n";
      section = f.section;
      os << "[" << section << "]\n";
    }
    os << f.key << " = " << f.get(cfg) << "\n";
  }
  return os.str();
}

}  // namespace oscar::sim
