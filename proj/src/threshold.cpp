#include "tcflow/threshold.hpp"

#include "tcflow/io.hpp"

#include <algorithm>
#include <cmath>

namespace tcflow {

namespace {

double student_t975(std::size_t dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                 2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086};
  if (dof == 0) return std::numeric_limits<double>::infinity();
  if (dof <= 20) return table[dof - 1];
  return 1.96;
}

}  // namespace

const char* to_string(Verdict v) { return v == Verdict::Stable ? "stable" : "not_certified"; }

double probe_horizon(const ThresholdConfig& config) {
  const double minimum = 10.0 / config.sim.params.mu(1);
  if (config.sim.T == 0.0) return minimum;
  if (config.sim.T < minimum * (1.0 - 1e-12))
    throw ConfigError("T: probe horizon must be >= 10 / mu_1 = " + format_double(minimum));
  return config.sim.T;
}

ProbeResult stability_probe(const ThresholdConfig& config, double amplitude) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ConfigError("amplitude: must be >= 0");
  if (!(config.decay_ratio > 0.0 && config.decay_ratio < 1.0)) throw ConfigError("decay_ratio: must lie in (0, 1)");
  if (!(config.growth_cap > 1.0)) throw ConfigError("growth_cap: must be > 1");
  ProbeResult out;
  out.params = config.sim.params;
  out.amplitude = amplitude;
  out.T = probe_horizon(config);
  if (amplitude == 0.0) {
    out.reason = "zero data";
    return out;
  }
  SimulationConfig sim = config.sim;
  sim.T = out.T;
  sim.amplitude = amplitude;
  sim.abort_growth = config.growth_cap;
  sim.samples = std::min(sim.samples, 200);
  const SimulationResult res = simulate(sim);
  out.final_ratio = res.final_ratio;
  out.max_growth = res.max_growth;
  out.max_mean = res.max_mean;
  out.initial_mean = res.initial_mean;
  out.initial_functional = res.initial_functional;
  out.fitted_rate = res.fitted_rate;
  if (res.failed) {
    out.verdict = Verdict::NotCertified;
    out.reason = "integration failure at t = " + format_double(res.failure_time) + ": " + res.failure_reason;
  } else if (res.aborted || res.max_growth > config.growth_cap) {
    out.verdict = Verdict::NotCertified;
    out.reason = "growth above cap";
  } else if (res.final_ratio > config.decay_ratio) {
    out.verdict = Verdict::NotCertified;
    out.reason = "insufficient decay";
  } else {
    out.reason = "decayed";
  }
  return out;
}

std::vector<ProbeResult> ladder_scan(const ThresholdConfig& config, const std::vector<double>& amplitudes) {
  std::vector<ProbeResult> out(amplitudes.size());
  parallel_for(amplitudes.size(), [&](std::size_t i) { out[i] = stability_probe(config, amplitudes[i]); });
  return out;
}

ThresholdRecord threshold_bisect(const ThresholdConfig& config, double a_lo, double a_hi, int iters) {
  if (iters < 0 || iters > 12) throw ConfigError("iters: must lie in [0, 12]");
  if (!(a_lo > 0.0) || !(a_hi > a_lo)) throw ConfigError("bracket: need 0 < a_lo < a_hi");
  ThresholdRecord rec;
  rec.params = config.sim.params;
  rec.T = probe_horizon(config);
  rec.decay_ratio = config.decay_ratio;
  rec.growth_cap = config.growth_cap;
  if (a_hi / a_lo <= 1.01) {
    rec.a_lo = a_lo;
    rec.a_hi = a_hi;
    rec.amplitude_star = a_lo;
    return rec;
  }

  const auto ends = ladder_scan(config, {a_lo, a_hi});
  rec.probes = ends;
  if (ends[0].verdict != Verdict::Stable)
    throw ConfigError("bracket: a_lo = " + format_double(a_lo) + " is not stable (" + ends[0].reason + ")");
  if (ends[1].verdict != Verdict::NotCertified)
    throw ConfigError("bracket: a_hi = " + format_double(a_hi) + " is certified stable");

  double lo = a_lo, hi = a_hi;
  while (rec.iterations < iters && hi / lo > 1.01) {
    const double mid = std::sqrt(lo * hi);
    const ProbeResult p = stability_probe(config, mid);
    rec.probes.push_back(p);
    if (p.verdict == Verdict::Stable)
      lo = mid;
    else
      hi = mid;
    ++rec.iterations;
  }
  rec.a_lo = lo;
  rec.a_hi = hi;
  rec.amplitude_star = lo;
  return rec;
}

BetaFit beta_fit(const std::vector<ThresholdRecord>& records) {
  if (records.size() < 4) throw ConfigError("beta_fit: need at least 4 records");
  BetaFit out;
  out.count = records.size();
  std::vector<double> x, y;
  for (const auto& r : records) {
    if (!(r.amplitude_star > 0.0)) throw ConfigError("beta_fit: amplitude_star must be > 0");
    x.push_back(std::log(r.params.nu()));
    y.push_back(std::log(r.amplitude_star));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    out.degenerate = true;
    out.intercept = my;
    out.ci_low = out.ci_high = 0.0;
    return out;
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  const double ssr = std::max(0.0, syy - out.slope * sxy);
  out.std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  const double half = student_t975(x.size() - 2) * out.std_error;
  out.ci_low = out.slope - half;
  out.ci_high = out.slope + half;
  return out;
}

std::string probe_csv_header() { return "nu,B,R,amplitude,verdict,final_ratio,max_growth"; }

std::string probe_csv_row(const ProbeResult& p) {
  return csv_join({format_double(p.params.nu()), format_double(p.params.B()), format_double(p.params.R()),
                   format_double(p.amplitude), to_string(p.verdict), format_double(p.final_ratio),
                   format_double(p.max_growth)});
}

}  // namespace tcflow
