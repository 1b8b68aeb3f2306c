// Exit gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles/lru_oracle.hpp"
#include "oscar/crypto.hpp"
#include "oscar/error.hpp"
#include "oscar/sim/config.hpp"
#include "oscar/sim/simulator.hpp"
#include "oscar/sim/sweep.hpp"

#include "oracles/vectors.inc"

using namespace oscar;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::size_t> kCounts{1, 2, 3, 4, 6, 8, 12, 16};

// Both sweeps are shared by the crossover and latency criteria.
const sim::SweepResult& sweep_for(const std::string& name) {
  static std::map<std::string, sim::SweepResult> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    sim::ScenarioConfig base = sim::preset(name);
    base.beta_s = 60;
    base.duration_s = 10800;
    it = cache.emplace(name, sim::sweep_crossover(base, kCounts, 5)).first;
  }
  return it->second;
}

Outcome replay_rejection() {
  const auto t0 = Clock::now();
  testing::Deployment d;
  std::mt19937_64 rng(2024);
  std::vector<coap::Message> captured;
  int rejected = 0, retransmits_ok = 0, legit_ok = 0;
  const int pairs = 1000;
  double now = 0;
  for (int i = 0; i < pairs; ++i) {
    now += 1.0;
    if (rng() % 4 == 0) d.producer->refresh_resource("/temp", testing::random_bytes(rng, 1, 40), now);

    const auto req1 = d.consumer->request("/temp");
    const auto resp1 = d.producer->handle(req1, "c1", now);
    try {
      d.consumer->accept_response(resp1, 10);
      ++legit_ok;
    } catch (const Error&) {
    }
    captured.push_back(resp1);

    // Replay a captured response against a fresh request.
    const auto req2 = d.consumer->request("/temp");
    coap::Message replay = captured[rng() % captured.size()];
    if (replay.message_id == req2.message_id) continue;
    replay.token = req2.token;
    replay.message_id = req2.message_id;
    try {
      d.consumer->accept_response(replay, 10);
    } catch (const Error& e) {
      if (e.code() == Errc::AuthFailure) ++rejected;
    }

    // The genuine answer, after a retransmission of the same request.
    const auto first = d.producer->handle(req2, "c1", now + 0.1);
    const auto again = d.producer->handle(req2, "c1", now + 2.1);
    try {
      if (coap::encode(first) == coap::encode(again)) {
        d.consumer->accept_response(again, 10);
        ++retransmits_ok;
      }
    } catch (const Error&) {
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream s;
  s << rejected << "/" << pairs << " replays rejected, " << retransmits_ok << "/" << pairs
    << " duplicate retransmissions accepted, " << legit_ok << "/" << pairs << " fresh responses accepted, "
    << secs << " s";
  return {rejected == pairs && retransmits_ok == pairs && legit_ok == pairs && secs < 10.0, s.str()};
}

Outcome trust_separation() {
  testing::Deployment d;
  const SigningKey adversary = SigningKey::from_seed(to_bytes("adversary"));
  // A certificate the authority legitimately issued to the adversary, for another capability.
  objsec::CertificatePayload ap;
  ap.subject_id = "prod-evil";
  ap.public_key = adversary.public_key();
  ap.capabilities = {"humidity-sensor"};
  ap.not_after = std::uint64_t{1} << 40;
  const auto evil_cert = objsec::issue_certificate(ap, d.authority, "authority");
  // And one it signed for itself, claiming the right capability.
  ap.subject_id = "prod-rogue";
  ap.capabilities = {"temperature-sensor"};
  const auto rogue_cert = objsec::issue_certificate(ap, adversary, "authority");

  d.consumer->set_certificate_fetcher([&](const std::string& id) -> std::optional<objsec::SecureObject> {
    if (id == "prod-evil") return evil_cert;
    if (id == "prod-rogue") return rogue_cert;
    return std::nullopt;
  });

  // Every secret is disclosed.
  const std::vector<keymat::AccessSecret> disclosed = d.as->grant("consumer-1", "pw", "/temp").secrets;
  const Bytes genuine = d.producer->resource("/temp")->encoded;
  std::mt19937_64 rng(99);
  int passed = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const auto req = d.consumer->request("/temp");
    const auto& secret = disclosed.front();
    const Bytes reading = testing::random_bytes(rng, 1, 30);
    std::string outer_sender = "prod-01";
    Bytes inner;
    switch (i % 5) {
      case 0:  // adversary signs, claims to be the producer
        inner = objsec::encode_object(objsec::sign_object(reading, adversary, "prod-01"));
        break;
      case 1:  // self-issued certificate
        outer_sender = "prod-rogue";
        inner = objsec::encode_object(objsec::sign_object(reading, adversary, "prod-rogue"));
        break;
      case 2:  // genuine certificate, wrong capability
        outer_sender = "prod-evil";
        inner = objsec::encode_object(objsec::sign_object(reading, adversary, "prod-evil"));
        break;
      case 3: {  // genuine signed object, altered body
        auto obj = objsec::decode_object(genuine);
        obj.body = reading;
        inner = objsec::encode_object(obj);
        break;
      }
      default:  // no signature layer at all
        inner = reading;
        break;
    }
    objsec::ObjectHeader h;
    h.sender_id = outer_sender;
    h.key_id = secret.key_id;
    h.binding_message_id = req.message_id;
    const auto key = keymat::derive_content_key(secret, req.message_id, outer_sender);
    coap::Message resp;
    resp.type = coap::Type::Ack;
    resp.code = coap::Code::Content;
    resp.message_id = req.message_id;
    resp.token = req.token;
    resp.payload = objsec::encode_object(objsec::encrypt_object(inner, key, h));
    try {
      d.consumer->accept_response(resp, 10);
      ++passed;
    } catch (const Error&) {
    }
    d.consumer->cancel(req.token);
  }
  std::ostringstream s;
  s << passed << "/" << n << " forged nested objects accepted with all secrets disclosed";
  return {passed == 0, s.str()};
}

Outcome lru_conformance() {
  const auto t0 = Clock::now();
  int matched = 0, clean = 0;
  const int n = 10000;
  std::string first_failure;
  for (int seed = 0; seed < n; ++seed) {
    const auto r = testing::run_lru_sequence(static_cast<std::uint64_t>(seed), 3, 2 + seed % 7, 60);
    matched += r.matched;
    clean += !r.evicted_without_cookie;
    if (!r.matched && first_failure.empty()) first_failure = " (seed " + std::to_string(seed) + ": " + r.first_mismatch + ")";
  }
  std::ostringstream s;
  s << matched << "/" << n << " sequences match the reference, " << clean << "/" << n
    << " without eviction before cookie echo, " << seconds_since(t0) << " s" << first_failure;
  return {matched == n && clean == n, s.str()};
}

Outcome crossover_one(const std::string& name, double lo, double hi, std::string& detail) {
  const auto t0 = Clock::now();
  const auto& r = sweep_for(name);
  const double secs = seconds_since(t0);
  bool ok = r.crossover_ratio && *r.crossover_ratio >= lo && *r.crossover_ratio <= hi;

  bool dtls_increasing = true;
  double omin = 1e300, omax = 0, osum = 0;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    if (i > 0 && !(r.points[i].dtls_server_j.mean > r.points[i - 1].dtls_server_j.mean)) dtls_increasing = false;
    omin = std::min(omin, r.points[i].oscar_server_j.mean);
    omax = std::max(omax, r.points[i].oscar_server_j.mean);
    osum += r.points[i].oscar_server_j.mean;
  }
  const double omean = osum / static_cast<double>(r.points.size());
  const bool flat = omax <= 1.2 * omean && omin >= 0.8 * omean;
  std::ostringstream s;
  s << name << ": " << sim::format_crossover(r) << " (band [" << lo << ", " << hi << "]), DTLS "
    << (dtls_increasing ? "strictly increasing" : "NOT strictly increasing") << ", OSCAR " << omin << ".."
    << omax << " J around " << omean << " J " << (flat ? "within" : "outside") << " +/-20%, sweep " << secs << " s";
  detail = s.str();
  return {ok && dtls_increasing && flat && secs < 120, detail};
}

Outcome crossover() {
  std::string a, b;
  const auto g16 = crossover_one("gen16", 1.0, 2.0, a);
  const auto g32 = crossover_one("gen32", 1.5, 3.0, b);
  return {g16.pass && g32.pass, a + "; " + b};
}

Outcome beta_monotonicity() {
  std::ostringstream s;
  int ok = 0, total = 0;
  for (const std::string name : {"gen16", "gen32"}) {
    for (std::size_t n : kCounts) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        double e[3];
        const double betas[3] = {30, 60, 120};
        for (int k = 0; k < 3; ++k) {
          sim::ScenarioConfig c = sim::preset(name);
          c.n_clients = n;
          c.beta_s = betas[k];
          c.rng_seed = seed;
          e[k] = sim::run_scenario(c).server_total_j;
        }
        ++total;
        if (e[0] > e[1] && e[1] > e[2]) {
          ++ok;
        } else if (total - ok == 1) {
          s << " first violation " << name << " n=" << n << " seed=" << seed << ": " << e[0] << ", " << e[1]
            << ", " << e[2];
        }
      }
    }
  }
  std::ostringstream out;
  out << ok << "/" << total << " (preset, clients, seed) cases with E(30) > E(60) > E(120)" << s.str();
  return {ok == total, out.str()};
}

Outcome latency_structure() {
  std::ostringstream s;
  bool all = true;
  for (const std::string name : {"gen16", "gen32"}) {
    const auto& r = sweep_for(name);
    const double verify = sim::preset(name).cpu_times.verify_time_s;
    double lo = 1e300, hi = 0;
    bool above_verify = true;
    for (const auto& p : r.points) {
      lo = std::min(lo, p.oscar_latency_s.mean);
      hi = std::max(hi, p.oscar_latency_s.mean);
      above_verify = above_verify && p.oscar_latency_s.mean >= verify;
    }
    const double spread = (hi - lo) / lo;
    // From the last point at or below one client per slot onwards.
    bool rising = true;
    std::size_t start = 0;
    for (std::size_t i = 0; i < r.points.size(); ++i)
      if (r.points[i].ratio <= 1.0) start = i;
    for (std::size_t i = start + 1; i < r.points.size(); ++i)
      if (!(r.points[i].dtls_latency_s.mean > r.points[i - 1].dtls_latency_s.mean)) rising = false;
    const bool ok = above_verify && spread < 0.15 && rising;
    all = all && ok;
    s << name << ": OSCAR " << lo << ".." << hi << " s (verify " << verify << " s, spread " << spread * 100
      << "%), DTLS " << r.points[start].dtls_latency_s.mean << " -> " << r.points.back().dtls_latency_s.mean << " s "
      << (rising ? "rising" : "NOT rising") << " past ratio 1; ";
  }
  std::string d = s.str();
  d.resize(d.size() - 2);
  return {all, d};
}

Outcome signing_count() {
  std::ostringstream s;
  bool ok = true;
  for (const std::string name : {"gen16", "gen32"}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      sim::ScenarioConfig c = sim::preset(name);
      c.beta_s = 60;
      c.duration_s = 10800;
      c.n_clients = 4;
      c.rng_seed = seed;
      const auto sig = sim::run_scenario(c).signatures;
      ok = ok && sig >= 171 && sig <= 189;
      s << (s.tellp() > 0 ? " " : "") << name << "/seed" << seed << "=" << sig;
    }
  }
  return {ok, "signatures in 3 h at beta 60 s (expected 180 +/- 9): " + s.str()};
}

Outcome codecs_and_determinism() {
  std::mt19937_64 rng(8);
  int coap_fail = 0, obj_fail = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    coap::Message m = testing::random_message(rng);
    const Bytes w = coap::encode(m);
    coap::canonicalize(m);
    if (!(coap::decode(w) == m)) ++coap_fail;
    const auto o = testing::random_object(rng);
    if (!(objsec::decode_object(objsec::encode_object(o)) == o)) ++obj_fail;
  }

  int prf_ok = 0, prf_total = 0;
  for (const auto& v : kHkdfVectors) {
    ++prf_total;
    prf_ok += to_hex(crypto::hkdf_sha256(from_hex(v.ikm), from_hex(v.salt), from_hex(v.info), v.len)) == v.okm;
  }
  for (const auto& v : kContentKeyVectors) {
    ++prf_total;
    const auto s = keymat::make_access_secret(1, from_hex(v.secret), {"/r"});
    const auto k = keymat::derive_content_key(s, static_cast<std::uint16_t>(v.mid), v.sender);
    prf_ok += to_hex(Bytes(k.bytes.begin(), k.bytes.end())) == v.key;
  }

  int det_ok = 0, det_total = 0;
  for (const std::string name : {"gen16", "gen32"}) {
    for (auto mode : {sim::Mode::Oscar, sim::Mode::DtlsPsk}) {
      sim::ScenarioConfig c = sim::preset(name);
      c.mode = mode;
      c.n_clients = 6;
      c.rng_seed = 17;
      ++det_total;
      det_ok += sim::serialize(sim::run_scenario(c)) == sim::serialize(sim::run_scenario(c));
    }
  }
  std::ostringstream s;
  s << "CoAP round-trip failures " << coap_fail << "/" << n << ", object round-trip failures " << obj_fail << "/"
    << n << ", PRF vectors " << prf_ok << "/" << prf_total << ", byte-identical reruns " << det_ok << "/"
    << det_total;
  return {coap_fail == 0 && obj_fail == 0 && prf_ok == prf_total && det_ok == det_total, s.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"replay rejection", replay_rejection},
      {"trust separation", trust_separation},
      {"LRU baseline conformance", lru_conformance},
      {"crossover reproduction", crossover},
      {"beta monotonicity", beta_monotonicity},
      {"latency structure", latency_structure},
      {"signing-count arithmetic", signing_count},
      {"codec and crypto properties", codecs_and_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu %s: %s - %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
