#include "oscar/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <queue>
#include <random>
#include <sstream>

#include "oscar/crypto.hpp"
#include "oscar/dtls.hpp"
#include "oscar/error.hpp"
#include "oscar/nodes.hpp"
#include "oscar/sim/mac.hpp"

namespace oscar::sim {
namespace {

constexpr std::size_t kServer = 0;
// Sizes of the plaintext CoAP exchange carried inside a DTLS record.
constexpr std::size_t kCoapGetBytes = 13;
constexpr std::size_t kCoapContentHeaderBytes = 9;

struct Scheduled {
  double time;
  std::uint64_t seq;
  std::function<void()> fn;
};

struct Later {
  bool operator()(const Scheduled& a, const Scheduled& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

enum class Session { None, Handshaking, Established };
enum class Flight { Hello, HelloCookie, Finished, AppData };

struct Client {
  std::size_t node = 0;
  std::string name;
  std::deque<double> backlog;
  bool busy = false;
  bool awaiting = false;
  double issued_at = 0;
  std::uint64_t timer = 0;
  double rto = 0;
  int attempts = 0;

  // OSCAR
  std::unique_ptr<nodes::Consumer> consumer;
  Bytes token;
  Bytes wire;
  bool bootstrapped = true;

  // DTLS
  Session session = Session::None;
  Flight flight = Flight::Hello;
  Bytes cookie;
  std::uint64_t generation = 0;  // handshake attempts started
  // Newest (generation, flight) the server has seen from this client.
  std::pair<std::uint64_t, int> server_seen{0, -1};
  int app_attempts = 0;
  double app_rto = 0;
};

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg);
  MetricsReport run();

 private:
  // Event loop plumbing.
  void at(double t, std::function<void()> fn);
  void arm(Client& c, double delay, std::function<void()> fn);
  void disarm(Client& c) { ++c.timer; }
  double cpu_job(std::size_t node, double earliest, double duration);
  void send(std::size_t src, std::size_t dst, std::size_t bytes, std::function<void(double)> delivered);
  void hop(std::size_t src, std::size_t dst, const std::vector<std::size_t>& frames, double now,
           std::function<void(double)> delivered);
  bool is_coordinator(std::size_t node) const { return has_coordinator_ && node == coordinator_; }

  // Request lifecycle.
  void arrival(std::size_t i);
  void start_next(std::size_t i);
  void complete(std::size_t i, double t);
  void fail(std::size_t i);
  std::string path_for();

  // OSCAR.
  void setup_oscar();
  void resign(std::size_t r, double t);
  void bootstrap(std::size_t i, std::size_t step);
  void oscar_begin(std::size_t i);
  void oscar_transmit(std::size_t i);
  void oscar_at_server(std::size_t i, const Bytes& wire, double t);
  void oscar_at_client(std::size_t i, const Bytes& wire, double t);

  // DTLS.
  void dtls_begin(std::size_t i);
  void dtls_handshake(std::size_t i);
  void dtls_transmit_flight(std::size_t i);
  void dtls_transmit_app(std::size_t i);
  void dtls_at_server(const dtls::Event& ev, double t);
  void dtls_server_action(const dtls::Action& a, double t);
  void dtls_hello_verify(std::size_t i, const Bytes& cookie);
  void dtls_server_hello(std::size_t i, double t);
  void dtls_finished(std::size_t i, double t);
  void dtls_alert(std::size_t i);
  void dtls_app_response(std::size_t i, double t);
  void reap(double t);

  double cpu_seconds(const nodes::OpCounters& before, const nodes::OpCounters& after) const;
  std::size_t client_index(const std::string& peer) const;

  ScenarioConfig cfg_;
  std::priority_queue<Scheduled, std::vector<Scheduled>, Later> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0;

  std::size_t nodes_ = 0;
  std::size_t coordinator_ = 0;
  std::size_t authz_ = 0;
  bool has_coordinator_ = false;
  std::vector<EnergestRecorder> energest_;
  std::vector<RadioState> radio_;
  std::vector<double> cpu_free_;
  std::vector<Client> clients_;
  std::vector<std::string> paths_;

  std::mt19937_64 workload_rng_;
  std::mt19937_64 mac_rng_;
  std::mt19937_64 loss_rng_;

  std::unique_ptr<nodes::Producer> producer_;
  std::unique_ptr<nodes::AuthzServer> authz_server_;
  std::unique_ptr<dtls::SessionTable> table_;
  std::uint64_t signatures_at_start_ = 0;
  std::uint64_t resource_version_ = 0;

  MetricsReport report_;
  double interarrival_sum_ = 0;
  std::uint64_t interarrival_count_ = 0;
};

Bytes digest(const std::string& label) {
  const auto d = crypto::sha256(to_bytes(label));
  return Bytes(d.begin(), d.end());
}

// Independent, reproducible stream seeds derived from the scenario seed.
std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

Simulation::Simulation(const ScenarioConfig& cfg)
    : cfg_(cfg),
      workload_rng_(mix(cfg.rng_seed, 1)),
      mac_rng_(mix(cfg.rng_seed, 2)),
      loss_rng_(mix(cfg.rng_seed, 3)) {
  validate(cfg_);
  nodes_ = 1 + cfg_.n_clients;
  if (cfg_.mac.type == MacType::BeaconEnabled) {
    has_coordinator_ = true;
    coordinator_ = nodes_++;
  }
  if (cfg_.mode == Mode::Oscar && cfg_.authz_bootstrap) authz_ = nodes_++;
  energest_.resize(nodes_);
  radio_.resize(nodes_);
  cpu_free_.assign(nodes_, 0.0);

  std::uniform_real_distribution<double> phase(0.0, cfg_.mac.check_interval_s());
  for (std::size_t n = 0; n < nodes_; ++n) {
    radio_[n].wake_phase = phase(mac_rng_);
    energest_[n].set_listen_schedule(cfg_.mac.type == MacType::AsyncLpl
                                         ? lpl_listen_schedule(cfg_.mac, radio_[n])
                                         : beacon_listen_schedule(cfg_.mac));
  }

  if (cfg_.n_resources == 1) {
    paths_.push_back(cfg_.resource_path);
  } else {
    for (std::size_t r = 0; r < cfg_.n_resources; ++r) paths_.push_back(cfg_.resource_path + "/" + std::to_string(r));
  }

  clients_.resize(cfg_.n_clients);
  for (std::size_t i = 0; i < cfg_.n_clients; ++i) {
    clients_[i].node = 1 + i;
    clients_[i].name = "client-" + std::to_string(i + 1);
  }

  report_.mode = cfg_.mode;
  report_.n_clients = cfg_.n_clients;
  report_.max_slots = cfg_.max_slots;
  report_.beta_s = cfg_.beta_s;
  report_.seed = cfg_.rng_seed;
  report_.duration_s = cfg_.duration_s;
}

void Simulation::at(double t, std::function<void()> fn) {
  queue_.push(Scheduled{t, seq_++, std::move(fn)});
}

void Simulation::arm(Client& c, double delay, std::function<void()> fn) {
  const std::uint64_t id = ++c.timer;
  Client* cp = &c;
  at(now_ + delay, [cp, id, fn = std::move(fn)] {
    if (cp->timer == id) fn();
  });
}

double Simulation::cpu_job(std::size_t node, double earliest, double duration) {
  const double start = std::max(earliest, cpu_free_[node]);
  const double end = start + duration;
  cpu_free_[node] = end;
  energest_[node].cpu(start, end);
  return end;
}

void Simulation::send(std::size_t src, std::size_t dst, std::size_t bytes,
                      std::function<void(double)> delivered) {
  const auto frames = fragment(cfg_.mac, bytes);
  if (!has_coordinator_ || is_coordinator(src) || is_coordinator(dst)) {
    hop(src, dst, frames, now_, std::move(delivered));
    return;
  }
  // Device to device relays through the PAN coordinator.
  hop(src, coordinator_, frames, now_, [this, dst, frames, delivered = std::move(delivered)](double t) {
    hop(coordinator_, dst, frames, t, delivered);
  });
}

void Simulation::hop(std::size_t src, std::size_t dst, const std::vector<std::size_t>& frames, double now,
                     std::function<void(double)> delivered) {
  HopTiming h;
  if (cfg_.mac.type == MacType::AsyncLpl) {
    h = mac_async_lpl(cfg_.mac, frames, radio_[src], radio_[dst], now);
  } else {
    const auto dir = is_coordinator(src) ? BeaconDirection::FromCoordinator : BeaconDirection::ToCoordinator;
    h = mac_beacon_enabled(cfg_.mac, frames, dir, radio_[src], radio_[dst], now);
  }
  for (const auto& iv : h.sender_tx) energest_[src].tx(iv.begin, iv.end);
  for (const auto& iv : h.sender_rx) energest_[src].rx(iv.begin, iv.end);
  for (const auto& iv : h.receiver_tx) energest_[dst].tx(iv.begin, iv.end);
  for (const auto& iv : h.receiver_rx) energest_[dst].rx(iv.begin, iv.end);
  report_.frames_sent += frames.size();

  bool lost = false;
  if (cfg_.mac.loss_probability > 0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t f = 0; f < frames.size(); ++f)
      if (u(loss_rng_) < cfg_.mac.loss_probability) lost = true;
  }
  if (lost) return;
  const double t = h.delivery_time;
  at(t, [delivered = std::move(delivered), t] { delivered(t); });
}

std::size_t Simulation::client_index(const std::string& peer) const {
  return static_cast<std::size_t>(std::stoul(peer.substr(7))) - 1;
}

std::string Simulation::path_for() {
  if (paths_.size() == 1) return paths_.front();
  std::uniform_int_distribution<std::size_t> pick(0, paths_.size() - 1);
  return paths_[pick(workload_rng_)];
}

double Simulation::cpu_seconds(const nodes::OpCounters& before, const nodes::OpCounters& after) const {
  const auto& c = cfg_.cpu_times;
  return static_cast<double>(after.signatures - before.signatures) * c.sign_time_s +
         static_cast<double>(after.verifications - before.verifications) * c.verify_time_s +
         static_cast<double>(after.aead - before.aead) * c.aead_time_s +
         static_cast<double>(after.prf - before.prf) * c.prf_time_s;
}

// ---------------------------------------------------------------------------
// Request lifecycle

void Simulation::arrival(std::size_t i) {
  Client& c = clients_[i];
  c.backlog.push_back(now_);
  ++report_.requests_issued;
  if (!c.busy) start_next(i);
}

void Simulation::start_next(std::size_t i) {
  Client& c = clients_[i];
  if (c.backlog.empty() || !c.bootstrapped) {
    c.busy = false;
    return;
  }
  c.backlog.pop_front();
  c.busy = true;
  c.issued_at = now_;
  if (cfg_.mode == Mode::Oscar) {
    oscar_begin(i);
  } else {
    dtls_begin(i);
  }
}

void Simulation::complete(std::size_t i, double t) {
  report_.latencies_s.push_back(t - clients_[i].issued_at);
  ++report_.requests_completed;
  start_next(i);
}

void Simulation::fail(std::size_t i) {
  ++report_.requests_failed;
  clients_[i].awaiting = false;
  start_next(i);
}

// ---------------------------------------------------------------------------
// OSCAR

void Simulation::setup_oscar() {
  const std::string tag = std::to_string(cfg_.rng_seed);
  const auto authority = SigningKey::from_seed(to_bytes("authority/" + tag));
  const auto producer_key = SigningKey::from_seed(to_bytes("producer/" + tag));

  objsec::CertificatePayload cp;
  cp.subject_id = cfg_.producer_id;
  cp.public_key = producer_key.public_key();
  cp.capabilities = {cfg_.capability};
  cp.not_before = 0;
  cp.not_after = std::uint64_t{1} << 40;
  const auto cert = objsec::issue_certificate(cp, authority, "authority");

  producer_ = std::make_unique<nodes::Producer>(nodes::ProducerIdentity{cfg_.producer_id, producer_key, cert},
                                                std::vector<VerifyKey>{authority.public_key()});
  const auto secret = keymat::make_access_secret(1, digest("secret/" + tag), paths_, 1);
  producer_->install_secret(secret);

  authz_server_ = std::make_unique<nodes::AuthzServer>(authority);
  authz_server_->register_secret(secret);
  authz_server_->publish_certificate(cert, paths_);

  nodes::CapabilityPolicy policy;
  policy.require(cfg_.resource_path, cfg_.capability);
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    Client& c = clients_[i];
    keymat::TrustStore trust;
    trust.add_anchor(authority.public_key());
    c.consumer = std::make_unique<nodes::Consumer>(c.name, trust, policy,
                                                   std::vector<SuiteId>{kSuiteEd25519AesCcm8},
                                                   mix(cfg_.rng_seed, 100 + i));
    authz_server_->register_principal(c.name, "cred-" + c.name, paths_);
    if (!cfg_.authz_bootstrap) c.consumer->install_grant(authz_server_->grant(c.name, "cred-" + c.name, paths_[0]));
  }

  // Representations present at boot are signed before the run starts.
  for (const auto& p : paths_) producer_->add_resource(p, Bytes(cfg_.payload_bytes, 0), 0.0);
  signatures_at_start_ = producer_->counters().signatures;

  // Each resource is updated every t = N * beta seconds with its own phase.
  const double period = cfg_.beta_s * static_cast<double>(cfg_.n_resources);
  std::uniform_real_distribution<double> phase(0.0, period);
  for (std::size_t r = 0; r < paths_.size(); ++r) {
    const double first = phase(workload_rng_);
    if (first < cfg_.duration_s) at(first, [this, r] { resign(r, now_); });
  }

  if (cfg_.authz_bootstrap) {
    std::uniform_real_distribution<double> start(0.0, 1.0);
    for (std::size_t i = 0; i < clients_.size(); ++i) {
      clients_[i].bootstrapped = false;
      clients_[i].busy = true;
      clients_[i].attempts = 1;
      clients_[i].rto = cfg_.retransmit_timeout_s;
      at(start(workload_rng_), [this, i] { bootstrap(i, 0); });
    }
  }
}

void Simulation::resign(std::size_t r, double t) {
  Bytes rep(cfg_.payload_bytes, 0);
  ++resource_version_;
  for (std::size_t b = 0; b < rep.size() && b < 8; ++b)
    rep[b] = static_cast<std::uint8_t>(resource_version_ >> (8 * b));
  const double end = cpu_job(kServer, t, cfg_.cpu_times.sign_time_s);
  at(end, [this, r, rep] { producer_->refresh_resource(paths_[r], rep, now_); });
  const double next = t + cfg_.beta_s * static_cast<double>(cfg_.n_resources);
  if (next < cfg_.duration_s) at(next, [this, r] { resign(r, now_); });
}

// Grant retrieval over an authenticated channel charged like a PSK handshake:
// six handshake flights followed by the grant itself.
void Simulation::bootstrap(std::size_t i, std::size_t step) {
  const auto& s = cfg_.sizes;
  const std::size_t sizes[] = {s.client_hello,          s.hello_verify_request,   s.client_hello_cookie,
                               s.server_hello_flight,   s.client_finished_flight, s.server_finished_flight,
                               s.grant_bytes + s.dtls_record_overhead};
  constexpr std::size_t kSteps = 7;
  Client& c = clients_[i];
  if (step == kSteps) {
    c.consumer->install_grant(authz_server_->grant(c.name, "cred-" + c.name, paths_[0]));
    c.bootstrapped = true;
    start_next(i);
    return;
  }
  const bool from_client = step % 2 == 0;
  const std::size_t src = from_client ? c.node : authz_;
  const std::size_t dst = from_client ? authz_ : c.node;
  send(src, dst, sizes[step] + s.net_header_bytes, [this, i, step, from_client](double t) {
    Client& cl = clients_[i];
    if (cl.bootstrapped) return;
    disarm(cl);
    // The client spends its handshake CPU on receiving flights 4 and 6.
    double ready = t;
    if (!from_client && (step == 3 || step == 5))
      ready = cpu_job(cl.node, t, cfg_.cpu_times.dtls_client_handshake_s / 2.0);
    at(ready, [this, i, step] {
      clients_[i].attempts = 1;
      clients_[i].rto = cfg_.retransmit_timeout_s;
      bootstrap(i, step + 1);
    });
  });
  arm(c, c.rto, [this, i, step] {
    Client& cl = clients_[i];
    if (cl.attempts >= cfg_.max_transmissions) return;  // never authorised
    ++cl.attempts;
    ++report_.retransmissions;
    cl.rto *= 2;
    bootstrap(i, step);
  });
}

void Simulation::oscar_begin(std::size_t i) {
  Client& c = clients_[i];
  coap::Message req = c.consumer->request(path_for());
  c.token = req.token;
  c.wire = coap::encode(req);
  c.attempts = 1;
  c.rto = cfg_.retransmit_timeout_s;
  c.awaiting = true;
  oscar_transmit(i);
}

void Simulation::oscar_transmit(std::size_t i) {
  Client& c = clients_[i];
  const Bytes wire = c.wire;
  send(c.node, kServer, wire.size() + cfg_.sizes.net_header_bytes,
       [this, i, wire](double t) { oscar_at_server(i, wire, t); });
  arm(c, c.rto, [this, i] {
    Client& cl = clients_[i];
    if (cl.attempts >= cfg_.max_transmissions) {
      cl.consumer->cancel(cl.token);
      fail(i);
      return;
    }
    ++cl.attempts;
    ++report_.retransmissions;
    cl.rto *= 2;
    oscar_transmit(i);
  });
}

void Simulation::oscar_at_server(std::size_t i, const Bytes& wire, double t) {
  const auto before = producer_->counters();
  const coap::Message resp = producer_->handle(coap::decode(wire), clients_[i].name, t);
  const double end = cpu_job(kServer, t, cpu_seconds(before, producer_->counters()));
  const Bytes out = coap::encode(resp);
  // The wire carries the configured signature size, not the one computed here.
  const std::size_t real_sig = suite_or_throw(kSuiteEd25519AesCcm8).signature_bytes();
  std::size_t bytes = out.size() + cfg_.sizes.net_header_bytes;
  if (resp.code == coap::Code::Content && bytes > real_sig) bytes = bytes - real_sig + cfg_.sizes.signature_bytes;
  at(end, [this, i, out, bytes] {
    send(kServer, clients_[i].node, bytes, [this, i, out](double t2) { oscar_at_client(i, out, t2); });
  });
}

void Simulation::oscar_at_client(std::size_t i, const Bytes& wire, double t) {
  Client& c = clients_[i];
  const coap::Message resp = coap::decode(wire);
  if (!c.awaiting || resp.token != c.token) return;  // late duplicate
  c.awaiting = false;
  disarm(c);
  const auto before = c.consumer->counters();
  bool ok = true;
  try {
    c.consumer->accept_response(resp, static_cast<std::uint64_t>(t));
  } catch (const Error&) {
    ok = false;
    c.consumer->cancel(c.token);
  }
  const double end = cpu_job(c.node, t, cpu_seconds(before, c.consumer->counters()));
  at(end, [this, i, ok, end] {
    if (ok) {
      complete(i, end);
    } else {
      fail(i);
    }
  });
}

// ---------------------------------------------------------------------------
// DTLS

void Simulation::dtls_begin(std::size_t i) {
  Client& c = clients_[i];
  c.awaiting = true;
  c.app_attempts = 1;
  c.app_rto = cfg_.retransmit_timeout_s;
  if (c.session == Session::Established) {
    dtls_transmit_app(i);
  } else {
    dtls_handshake(i);
  }
}

void Simulation::dtls_handshake(std::size_t i) {
  Client& c = clients_[i];
  c.session = Session::Handshaking;
  ++c.generation;
  c.flight = Flight::Hello;
  c.cookie.clear();
  c.attempts = 1;
  c.rto = cfg_.retransmit_timeout_s;
  dtls_transmit_flight(i);
}

void Simulation::dtls_transmit_flight(std::size_t i) {
  Client& c = clients_[i];
  const auto& s = cfg_.sizes;
  dtls::Event ev;
  ev.peer = c.name;
  std::size_t bytes = 0;
  switch (c.flight) {
    case Flight::Hello:
      ev.type = dtls::EventType::ClientHello;
      bytes = s.client_hello;
      break;
    case Flight::HelloCookie:
      ev.type = dtls::EventType::ClientHelloCookie;
      ev.cookie = c.cookie;
      bytes = s.client_hello_cookie;
      break;
    case Flight::Finished:
      ev.type = dtls::EventType::HandshakeContinue;
      bytes = s.client_finished_flight;
      break;
    case Flight::AppData:
      return;
  }
  const std::pair<std::uint64_t, int> seq{c.generation, static_cast<int>(c.flight)};
  send(c.node, kServer, bytes + s.net_header_bytes, [this, i, ev, seq](double t) {
    // A late copy of flight 3 from a handshake the server has already moved
    // past is recognised by its handshake message sequence and discarded.
    auto& seen = clients_[i].server_seen;
    if (ev.type == dtls::EventType::ClientHelloCookie && seq < seen) return;
    seen = std::max(seen, seq);
    dtls_at_server(ev, t);
  });
  arm(c, c.rto, [this, i] {
    Client& cl = clients_[i];
    if (cl.attempts >= cfg_.max_transmissions) {
      cl.session = Session::None;
      fail(i);
      return;
    }
    ++cl.attempts;
    ++report_.retransmissions;
    cl.rto *= 2;
    dtls_transmit_flight(i);
  });
}

void Simulation::dtls_transmit_app(std::size_t i) {
  Client& c = clients_[i];
  c.flight = Flight::AppData;
  const double ready = cpu_job(c.node, now_, cfg_.cpu_times.aead_time_s);
  const std::size_t bytes = kCoapGetBytes + cfg_.sizes.dtls_record_overhead + cfg_.sizes.net_header_bytes;
  at(ready, [this, i, bytes] {
    dtls::Event ev{dtls::EventType::AppData, clients_[i].name, {}};
    send(clients_[i].node, kServer, bytes, [this, ev](double t) { dtls_at_server(ev, t); });
  });
  arm(c, c.app_rto + (ready - now_), [this, i] {
    Client& cl = clients_[i];
    if (cl.app_attempts >= cfg_.max_transmissions) {
      fail(i);
      return;
    }
    ++cl.app_attempts;
    ++report_.retransmissions;
    cl.app_rto *= 2;
    if (cl.session == Session::Established) {
      dtls_transmit_app(i);
    } else {
      dtls_handshake(i);
    }
  });
}

void Simulation::dtls_at_server(const dtls::Event& ev, double t) {
  for (const auto& a : table_->handle(ev, t)) dtls_server_action(a, t);
}

void Simulation::dtls_server_action(const dtls::Action& a, double t) {
  const auto& s = cfg_.sizes;
  const auto& cpu = cfg_.cpu_times;
  const std::size_t i = client_index(a.peer);
  const std::size_t node = clients_[i].node;
  double end = t;
  std::size_t bytes = 0;
  std::function<void(double)> on_delivery;
  switch (a.type) {
    case dtls::ActionType::HelloVerifyRequest: {
      end = cpu_job(kServer, t, cpu.prf_time_s);
      bytes = s.hello_verify_request;
      const Bytes cookie = a.cookie;
      on_delivery = [this, i, cookie](double) { dtls_hello_verify(i, cookie); };
      break;
    }
    case dtls::ActionType::ServerHelloFlight:
      end = cpu_job(kServer, t, cpu.dtls_server_handshake_s / 2.0);
      bytes = s.server_hello_flight;
      on_delivery = [this, i](double t2) { dtls_server_hello(i, t2); };
      break;
    case dtls::ActionType::FinishedFlight:
      end = cpu_job(kServer, t, cpu.dtls_server_handshake_s / 2.0);
      bytes = s.server_finished_flight;
      on_delivery = [this, i](double t2) { dtls_finished(i, t2); };
      break;
    case dtls::ActionType::CloseAlert:
      end = cpu_job(kServer, t, cpu.aead_time_s);
      bytes = s.close_alert;
      on_delivery = [this, i](double) { dtls_alert(i); };
      break;
    case dtls::ActionType::DeliverAppData:
      end = cpu_job(kServer, t, 2.0 * cpu.aead_time_s);
      bytes = kCoapContentHeaderBytes + cfg_.payload_bytes + s.dtls_record_overhead;
      on_delivery = [this, i](double t2) { dtls_app_response(i, t2); };
      break;
  }
  bytes += s.net_header_bytes;
  at(end, [this, node, bytes, on_delivery = std::move(on_delivery)] { send(kServer, node, bytes, on_delivery); });
}

void Simulation::dtls_hello_verify(std::size_t i, const Bytes& cookie) {
  Client& c = clients_[i];
  if (c.session != Session::Handshaking || c.flight != Flight::Hello) return;
  disarm(c);
  c.cookie = cookie;
  c.flight = Flight::HelloCookie;
  c.attempts = 1;
  c.rto = cfg_.retransmit_timeout_s;
  dtls_transmit_flight(i);
}

void Simulation::dtls_server_hello(std::size_t i, double t) {
  Client& c = clients_[i];
  if (c.session != Session::Handshaking || c.flight != Flight::HelloCookie) return;
  disarm(c);
  c.flight = Flight::Finished;
  const double end = cpu_job(c.node, t, cfg_.cpu_times.dtls_client_handshake_s / 2.0);
  at(end, [this, i] {
    Client& cl = clients_[i];
    if (cl.session != Session::Handshaking || cl.flight != Flight::Finished) return;
    cl.attempts = 1;
    cl.rto = cfg_.retransmit_timeout_s;
    dtls_transmit_flight(i);
  });
}

void Simulation::dtls_finished(std::size_t i, double t) {
  Client& c = clients_[i];
  if (c.session != Session::Handshaking || c.flight != Flight::Finished) return;
  disarm(c);
  const double end = cpu_job(c.node, t, cfg_.cpu_times.dtls_client_handshake_s / 2.0);
  c.flight = Flight::AppData;
  at(end, [this, i] {
    Client& cl = clients_[i];
    if (cl.session != Session::Handshaking || cl.flight != Flight::AppData) return;
    cl.session = Session::Established;
    if (cl.awaiting) dtls_transmit_app(i);
  });
}

void Simulation::dtls_alert(std::size_t i) {
  Client& c = clients_[i];
  const Session was = c.session;
  c.session = Session::None;
  // Mid-handshake eviction restarts at once; a lost request is recovered by its timer.
  if (was == Session::Handshaking && c.awaiting) {
    disarm(c);
    dtls_handshake(i);
  }
}

void Simulation::dtls_app_response(std::size_t i, double t) {
  Client& c = clients_[i];
  if (!c.awaiting || c.flight != Flight::AppData) return;
  c.awaiting = false;
  disarm(c);
  const double end = cpu_job(c.node, t, cfg_.cpu_times.aead_time_s);
  at(end, [this, i, end] { complete(i, end); });
}

void Simulation::reap(double t) {
  dtls::Event ev{dtls::EventType::Timeout, "", {}};
  table_->handle(ev, t);
  const double next = t + cfg_.handshake_timeout_s;
  if (next < cfg_.duration_s) at(next, [this] { reap(now_); });
}

// ---------------------------------------------------------------------------

MetricsReport Simulation::run() {
  if (cfg_.mode == Mode::Oscar) {
    setup_oscar();
  } else {
    table_ = std::make_unique<dtls::SessionTable>(cfg_.max_slots,
                                                  digest("cookie/" + std::to_string(cfg_.rng_seed)),
                                                  cfg_.handshake_timeout_s);
    at(cfg_.handshake_timeout_s, [this] { reap(now_); });
  }

  const double mean_gap = 60.0 / cfg_.requests_per_min;
  std::exponential_distribution<double> gap(1.0 / mean_gap);
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    double t = gap(workload_rng_);
    double prev = -1;
    while (t < cfg_.duration_s) {
      at(t, [this, i] { arrival(i); });
      if (prev >= 0) {
        interarrival_sum_ += t - prev;
        ++interarrival_count_;
      }
      prev = t;
      t += gap(workload_rng_);
    }
  }

  while (!queue_.empty()) {
    Scheduled ev = queue_.top();
    if (ev.time >= cfg_.duration_s) break;
    queue_.pop();
    now_ = ev.time;
    ev.fn();
  }

  // Requests still in flight at the end are neither completed nor failed.
  const double T = cfg_.duration_s;
  const auto server_ledger = energest_[kServer].finalize(T);
  report_.server = NodeReport{server_ledger, account_energy(server_ledger, cfg_.energy)};
  report_.server_total_j = report_.server.energy.total_j();
  report_.server_cpu_j = report_.server.energy.cpu_j();
  report_.server_radio_j = report_.server.energy.radio_j();

  double marginal = 0;
  for (const auto& c : clients_) {
    const auto ledger = energest_[c.node].finalize(T);
    NodeReport nr{ledger, account_energy(ledger, cfg_.energy)};
    EnergestRecorder idle;
    idle.set_listen_schedule(energest_[c.node].listen_schedule());
    const auto base = account_energy(idle.finalize(T), cfg_.energy);
    marginal += nr.energy.total_j() - base.total_j();
    report_.clients.push_back(nr);
  }
  if (report_.requests_completed > 0)
    report_.client_mean_j_per_req = marginal / static_cast<double>(report_.requests_completed);

  if (!report_.latencies_s.empty()) {
    const auto& l = report_.latencies_s;
    double sum = 0;
    for (double x : l) sum += x;
    report_.latency_mean_s = sum / static_cast<double>(l.size());
    std::vector<double> sorted = l;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
    report_.latency_p95_s = sorted[std::max<std::size_t>(rank, 1) - 1];
  }

  if (cfg_.mode == Mode::Oscar) {
    report_.signatures = producer_->counters().signatures - signatures_at_start_;
    for (const auto& c : clients_) report_.verifications += c.consumer->counters().verifications;
  } else {
    report_.handshakes = table_->counters().handshakes_completed;
    report_.evictions = table_->counters().evictions;
  }
  if (interarrival_count_ > 0)
    report_.mean_interarrival_s = interarrival_sum_ / static_cast<double>(interarrival_count_);
  return report_;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

void put_ledger(std::ostringstream& os, const std::string& name, const NodeReport& n) {
  os << name << ".cpu_active=" << fmt(n.ledger.cpu_active) << "\n"
     << name << ".cpu_lpm=" << fmt(n.ledger.cpu_lpm) << "\n"
     << name << ".radio_rx=" << fmt(n.ledger.radio_rx) << "\n"
     << name << ".radio_tx=" << fmt(n.ledger.radio_tx) << "\n"
     << name << ".energy_j=" << fmt(n.energy.total_j()) << "\n";
}

}  // namespace

MetricsReport run_scenario(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  return sim.run();
}

std::string csv_row(const MetricsReport& r) {
  std::ostringstream os;
  os << mode_name(r.mode) << ',' << r.n_clients << ',' << r.max_slots << ',' << fmt(r.beta_s) << ',' << r.seed
     << ',' << fmt(r.server_total_j) << ',' << fmt(r.server_cpu_j) << ',' << fmt(r.server_radio_j) << ','
     << fmt(r.client_mean_j_per_req) << ',' << fmt(r.latency_mean_s) << ',' << fmt(r.latency_p95_s) << ','
     << r.handshakes << ',' << r.evictions << ',' << r.signatures << ',' << r.verifications;
  return os.str();
}

std::string serialize(const MetricsReport& r) {
  std::ostringstream os;
  os << "csv=" << csv_row(r) << "\n"
     << "duration_s=" << fmt(r.duration_s) << "\n"
     << "requests_issued=" << r.requests_issued << "\n"
     << "requests_completed=" << r.requests_completed << "\n"
     << "requests_failed=" << r.requests_failed << "\n"
     << "retransmissions=" << r.retransmissions << "\n"
     << "frames_sent=" << r.frames_sent << "\n"
     << "mean_interarrival_s=" << fmt(r.mean_interarrival_s) << "\n";
  put_ledger(os, "server", r.server);
  for (std::size_t i = 0; i < r.clients.size(); ++i) put_ledger(os, "client" + std::to_string(i + 1), r.clients[i]);
  os << "latencies=";
  for (std::size_t i = 0; i < r.latencies_s.size(); ++i) os << (i ? "," : "") << fmt(r.latencies_s[i]);
  os << "\n";
  return os.str();
}

}  // namespace oscar::sim
