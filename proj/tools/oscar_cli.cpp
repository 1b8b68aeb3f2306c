// oscar-cli: keys, certificates, access secrets, inspection, loopback demo
// and simulator runs.
//
// Exit codes:
//   0  success
//   1  usage error
//   2  invalid scenario / configuration
//   3  file I/O error
//   4  demo step failed
//   5  malformed input or failed cryptographic check

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "demo.hpp"
#include "oscar/crypto.hpp"
#include "oscar/error.hpp"
#include "oscar/keymat.hpp"
#include "oscar/objsec.hpp"
#include "oscar/sim/simulator.hpp"
#include "oscar/sim/sweep.hpp"

using namespace oscar;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kIo = 3, kDemo = 4, kInput = 5 };

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Opens every output before anything is written, so a bad path leaves no partial result.
std::vector<std::ofstream> open_outputs(const std::vector<std::string>& paths) {
  std::vector<std::ofstream> out;
  for (const auto& p : paths) {
    out.emplace_back(p, std::ios::binary | std::ios::trunc);
    if (!out.back()) throw Error(Errc::IoError, "cannot write " + p);
  }
  return out;
}

void write(std::ofstream& out, ByteView data, const std::string& path) {
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw Error(Errc::IoError, "write failed: " + path);
}

objsec::KeyFile load_key(const std::string& path, objsec::KeyFile::Type want) {
  auto k = objsec::decode_key_file(read_file(path));
  if (k.type != want)
    throw Error(Errc::KeyInvalid, path + ": expected a " +
                                      (want == objsec::KeyFile::Type::Private ? "private" : "public") + " key");
  return k;
}

std::uint64_t unix_now() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
}

struct SimFlags {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> clients;
  std::optional<double> beta;
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--config", f.config, "Scenario file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", f.preset, "Platform preset when no scenario file is given")
      ->check(CLI::IsMember({"gen16", "gen32"}));
  cmd->add_option("--out", f.out, "CSV output path (default: stdout)");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--beta", f.beta, "Mean re-signing interval in seconds");
}

sim::ScenarioConfig scenario_from(const SimFlags& f) {
  sim::ScenarioConfig cfg = !f.config.empty() ? sim::load_scenario(f.config)
                                              : sim::preset(f.preset.empty() ? "gen16" : f.preset);
  if (!f.config.empty() && !f.preset.empty() && f.preset != cfg.preset)
    throw Error(Errc::ConfigInvalid, "--preset " + f.preset + " conflicts with scenario preset " + cfg.preset);
  if (f.mode) cfg.mode = *f.mode == "oscar" ? sim::Mode::Oscar : sim::Mode::DtlsPsk;
  if (f.clients) cfg.n_clients = *f.clients;
  if (f.beta) cfg.beta_s = *f.beta;
  if (f.seed) cfg.rng_seed = *f.seed;
  sim::validate(cfg);
  return cfg;
}

void emit(const SimFlags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
    return;
  }
  auto outs = open_outputs({f.out});
  write(outs[0], to_bytes(text), f.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object security for CoAP: tooling and simulator"};
  app.require_subcommand(1);

  // keygen
  std::string kg_out, kg_id = "node";
  std::optional<std::uint64_t> kg_seed;
  auto* keygen = app.add_subcommand("keygen", "Generate a signature key pair (<out>.key, <out>.pub)");
  keygen->add_option("--out", kg_out, "Output path prefix")->required();
  keygen->add_option("--id", kg_id, "Owner identifier stored in the key files");
  keygen->add_option("--seed", kg_seed, "Derive the key deterministically from this seed");

  // cert-issue
  std::string ci_ca, ci_subject_key, ci_subject, ci_out, ci_location;
  std::vector<std::string> ci_caps;
  std::optional<std::uint64_t> ci_nb, ci_na;
  auto* cert = app.add_subcommand("cert-issue", "Issue a producer certificate signed by a trust anchor");
  cert->add_option("--ca-key", ci_ca, "Anchor private key file")->required()->check(CLI::ExistingFile);
  cert->add_option("--subject-key", ci_subject_key, "Subject public key file")->required()->check(CLI::ExistingFile);
  cert->add_option("--subject", ci_subject, "Subject id (default: owner id of the subject key)");
  cert->add_option("--capability", ci_caps, "Capability (repeatable)")->required();
  cert->add_option("--location", ci_location, "Optional location string");
  cert->add_option("--not-before", ci_nb, "Validity start, unix seconds (default: now)");
  cert->add_option("--not-after", ci_na, "Validity end, unix seconds (default: now + 365 days)");
  cert->add_option("--out", ci_out, "Certificate output file")->required();

  // secret-issue
  std::string si_ca, si_out, si_secret_hex;
  std::uint16_t si_key_id = 0;
  std::uint64_t si_epoch = 1;
  std::vector<std::string> si_scope;
  auto* secret = app.add_subcommand("secret-issue", "Issue a signed access secret for a resource group");
  secret->add_option("--ca-key", si_ca, "Authority private key file")->required()->check(CLI::ExistingFile);
  secret->add_option("--key-id", si_key_id, "Key identifier")->required();
  secret->add_option("--scope", si_scope, "Resource path covered (repeatable)")->required();
  secret->add_option("--epoch", si_epoch, "Epoch number");
  secret->add_option("--secret-hex", si_secret_hex, "Secret value, 16..32 bytes hex (default: random 16)");
  secret->add_option("--out", si_out, "Output file")->required();

  // inspect
  std::string in_path;
  auto* inspect = app.add_subcommand("inspect", "Print the fields of a key file or secured object");
  inspect->add_option("file", in_path, "File to inspect")->required()->check(CLI::ExistingFile);

  // demo
  tools::DemoOptions demo_opt;
  std::string demo_config;
  auto* demo = app.add_subcommand("demo", "Producer, consumer and authorization server over UDP loopback");
  demo->add_option("--config", demo_config, "Scenario file (producer id, resource path, capability)")
      ->check(CLI::ExistingFile);
  demo->add_flag("--tamper", demo_opt.tamper, "Corrupt the response in transit");
  demo->add_flag("--wrong-scope", demo_opt.wrong_scope, "Consumer is authorised for a different resource");

  // sim-run / sim-sweep
  SimFlags run_flags, sweep_flags;
  auto* sim_run = app.add_subcommand("sim-run", "Run one scenario and print a CSV row");
  add_sim_flags(sim_run, run_flags);
  sim_run->add_option("--mode", run_flags.mode, "oscar or dtls")->check(CLI::IsMember({"oscar", "dtls"}));
  sim_run->add_option("--clients", run_flags.clients, "Number of clients");

  std::vector<std::size_t> sweep_counts{3, 4, 6, 8, 12, 16};
  std::size_t sweep_seeds = 5;
  auto* sim_sweep = app.add_subcommand("sim-sweep", "Paired OSCAR/DTLS runs over client counts with crossover");
  add_sim_flags(sim_sweep, sweep_flags);
  sim_sweep->add_option("--counts", sweep_counts, "Client counts")->delimiter(',');
  sim_sweep->add_option("--seeds", sweep_seeds, "Seeds per point")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*keygen) {
      const std::string priv = kg_out + ".key", pub = kg_out + ".pub";
      SigningKey key;
      if (kg_seed) {
        ByteWriter w;
        w.u64(*kg_seed);
        key = SigningKey::from_seed(std::move(w).take());
      } else {
        key = SigningKey::generate();
      }
      auto outs = open_outputs({priv, pub});
      write(outs[0], objsec::encode_key_file({objsec::KeyFile::Type::Private, key.suite, kg_id, key.bytes}), priv);
      const VerifyKey vk = key.public_key();
      write(outs[1], objsec::encode_key_file({objsec::KeyFile::Type::Public, vk.suite, kg_id, vk.bytes}), pub);
      std::cout << "wrote " << priv << " and " << pub << "\n";
    } else if (*cert) {
      const auto ca = load_key(ci_ca, objsec::KeyFile::Type::Private);
      const auto subject = load_key(ci_subject_key, objsec::KeyFile::Type::Public);
      objsec::CertificatePayload p;
      p.subject_id = ci_subject.empty() ? subject.owner_id : ci_subject;
      p.public_key = VerifyKey{subject.suite, subject.key};
      p.capabilities = ci_caps;
      if (!ci_location.empty()) p.location = ci_location;
      const std::uint64_t now = unix_now();
      p.not_before = ci_nb.value_or(now);
      p.not_after = ci_na.value_or(p.not_before + 365ULL * 86400ULL);
      const auto obj = objsec::issue_certificate(p, SigningKey{ca.suite, ca.key}, ca.owner_id);
      auto outs = open_outputs({ci_out});
      write(outs[0], objsec::encode_object(obj), ci_out);
      std::cout << "wrote " << ci_out << "\n";
    } else if (*secret) {
      const auto ca = load_key(si_ca, objsec::KeyFile::Type::Private);
      const Bytes value = si_secret_hex.empty() ? crypto::random_bytes(16) : from_hex(si_secret_hex);
      const auto s = keymat::make_access_secret(si_key_id, value, si_scope, si_epoch);
      keymat::check_scope_partition(std::vector<keymat::AccessSecret>{s});
      const auto obj = keymat::issue_access_secret(s, SigningKey{ca.suite, ca.key}, ca.owner_id);
      auto outs = open_outputs({si_out});
      write(outs[0], objsec::encode_object(obj), si_out);
      std::cout << "wrote " << si_out << "\n";
    } else if (*inspect) {
      const Bytes data = read_file(in_path);
      const bool key_file = data.size() > 1 && (data[1] == 0x10 || data[1] == 0x11);
      if (key_file) {
        std::cout << objsec::describe(objsec::decode_key_file(data));
      } else {
        const auto obj = objsec::decode_object(data);
        std::cout << objsec::describe(obj);
        if (obj.kind == objsec::Kind::Signed && objsec::nesting_depth(obj.body) == 0) {
          try {
            const auto s = keymat::decode_access_secret(obj.body);
            std::cout << "access_secret: key_id=" << s.key_id << " epoch=" << s.epoch
                      << " secret_bytes=" << s.secret.size() << " scope=";
            for (std::size_t i = 0; i < s.resource_scope.size(); ++i)
              std::cout << (i ? "," : "") << s.resource_scope[i];
            std::cout << "\n";
          } catch (const Error&) {
          }
        }
      }
    } else if (*demo) {
      if (!demo_config.empty()) {
        const auto cfg = sim::load_scenario(demo_config);
        demo_opt.producer_id = cfg.producer_id;
        demo_opt.resource_path = cfg.resource_path;
        demo_opt.capability = cfg.capability;
      }
      const auto r = tools::run_demo(demo_opt, std::cout);
      if (!r.ok) {
        std::cerr << "demo failed at step: " << r.failed_step << "\n";
        return kDemo;
      }
      std::cout << "demo ok\n";
    } else if (*sim_run) {
      const auto cfg = scenario_from(run_flags);
      const auto report = sim::run_scenario(cfg);
      emit(run_flags, std::string(sim::kCsvHeader) + "\n" + sim::csv_row(report) + "\n");
    } else if (*sim_sweep) {
      if (sweep_counts.empty()) throw Error(Errc::ConfigInvalid, "--counts must not be empty");
      const auto base = scenario_from(sweep_flags);
      const auto result = sim::sweep_crossover(base, sweep_counts, sweep_seeds);
      std::ostringstream csv;
      csv << sim::kCsvHeader << "\n";
      for (const auto& r : result.runs) csv << sim::csv_row(r) << "\n";
      emit(sweep_flags, csv.str());
      (sweep_flags.out.empty() ? std::cerr : std::cout) << sim::format_crossover(result) << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::ConfigInvalid: return kConfig;
      case Errc::IoError: return kIo;
      default: return kInput;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kOk;
}
