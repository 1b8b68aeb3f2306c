#include "oscar/sim/sweep.hpp"

#include <cmath>
#include <sstream>

#include "oscar/error.hpp"

namespace oscar::sim {
namespace {

// Two-sided 95% quantiles of Student's t, df = 1..30.
constexpr double kT95[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                           2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                           2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};

}  // namespace

SweepStat summarize(const std::vector<double>& samples) {
  SweepStat s;
  if (samples.empty()) return s;
  double sum = 0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return s;
  double ss = 0;
  for (double x : samples) ss += (x - s.mean) * (x - s.mean);
  const std::size_t df = samples.size() - 1;
  const double sd = std::sqrt(ss / static_cast<double>(df));
  const double t = df <= 30 ? kT95[df - 1] : 1.96;
  s.ci95 = t * sd / std::sqrt(static_cast<double>(samples.size()));
  return s;
}

std::optional<double> interpolate_crossover(const std::vector<double>& x, const std::vector<double>& oscar,
                                            const std::vector<double>& dtls) {
  if (x.empty() || x.size() != oscar.size() || x.size() != dtls.size()) return std::nullopt;
  double prev = oscar[0] - dtls[0];
  if (prev < 0) return x[0];
  for (std::size_t k = 1; k < x.size(); ++k) {
    const double d = oscar[k] - dtls[k];
    if (d < 0) {
      // prev >= 0 > d
      return x[k - 1] + (x[k] - x[k - 1]) * prev / (prev - d);
    }
    prev = d;
  }
  return std::nullopt;
}

SweepResult sweep_crossover(const ScenarioConfig& base, const std::vector<std::size_t>& client_counts,
                            std::size_t seeds) {
  if (client_counts.empty()) throw Error(Errc::ConfigInvalid, "sweep needs at least one client count");
  if (seeds == 0) throw Error(Errc::ConfigInvalid, "sweep needs at least one seed");
  validate(base);

  SweepResult result;
  std::vector<double> xs, os, ds;
  for (std::size_t n : client_counts) {
    SweepPoint p;
    p.n_clients = n;
    p.ratio = static_cast<double>(n) / static_cast<double>(base.max_slots);
    std::vector<double> oe, de, ol, dl;
    for (Mode mode : {Mode::Oscar, Mode::DtlsPsk}) {
      for (std::size_t s = 0; s < seeds; ++s) {
        ScenarioConfig cfg = base;
        cfg.mode = mode;
        cfg.n_clients = n;
        cfg.rng_seed = base.rng_seed + s;
        MetricsReport r = run_scenario(cfg);
        (mode == Mode::Oscar ? oe : de).push_back(r.server_total_j);
        (mode == Mode::Oscar ? ol : dl).push_back(r.latency_mean_s);
        result.runs.push_back(std::move(r));
      }
    }
    p.oscar_server_j = summarize(oe);
    p.dtls_server_j = summarize(de);
    p.oscar_latency_s = summarize(ol);
    p.dtls_latency_s = summarize(dl);
    xs.push_back(p.ratio);
    os.push_back(p.oscar_server_j.mean);
    ds.push_back(p.dtls_server_j.mean);
    result.points.push_back(p);
  }
  result.crossover_ratio = interpolate_crossover(xs, os, ds);
  return result;
}

std::string format_crossover(const SweepResult& r) {
  std::ostringstream os;
  if (r.crossover_ratio) {
    os << "crossover_ratio=" << *r.crossover_ratio;
  } else {
    os << "crossover_ratio=none";
  }
  return os.str();
}

}  // namespace oscar::sim
