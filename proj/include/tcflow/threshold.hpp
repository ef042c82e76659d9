#pragma once

#include "tcflow/nonlinear_solver.hpp"

#include <string>
#include <vector>

namespace tcflow {

enum class Verdict { Stable, NotCertified };
const char* to_string(Verdict v);

struct ThresholdConfig {
  SimulationConfig sim;      // amplitude is set per probe
  double decay_ratio = 0.1;  // stable needs ||w - mean||(T) <= decay_ratio * initial
  double growth_cap = 20.0;  // and no intermediate growth above growth_cap * initial
};

struct ProbeResult {
  FlowParams params;
  double amplitude = 0.0;
  Verdict verdict = Verdict::Stable;
  double final_ratio = 0.0;
  double max_growth = 0.0;
  double max_mean = 0.0;
  double initial_mean = 0.0;
  double initial_functional = 0.0;
  double fitted_rate = 0.0;
  double T = 0.0;
  std::string reason;
};

/// Horizon actually used: sim.T, or 10 / mu_1 when sim.T == 0. Throws ConfigError if below 10 / mu_1.
double probe_horizon(const ThresholdConfig& config);

ProbeResult stability_probe(const ThresholdConfig& config, double amplitude);

/// Probes run in parallel; results in input order.
std::vector<ProbeResult> ladder_scan(const ThresholdConfig& config, const std::vector<double>& amplitudes);

struct ThresholdRecord {
  FlowParams params;
  double T = 0.0;
  double decay_ratio = 0.0;
  double growth_cap = 0.0;
  double a_lo = 0.0;  // final bracket
  double a_hi = 0.0;
  double amplitude_star = 0.0;
  int iterations = 0;
  std::vector<ProbeResult> probes;
};

/// Bisection in log amplitude. A bracket with a_hi / a_lo <= 1.01 is returned as is, unprobed.
/// Otherwise both ends are probed first; probe(a_lo) must be stable and
/// probe(a_hi) not certified, otherwise ConfigError. Stops after `iters` (<= 12) halvings or once
/// a_hi / a_lo <= 1.01.
ThresholdRecord threshold_bisect(const ThresholdConfig& config, double a_lo, double a_hi, int iters);

struct BetaFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;   // 95% interval, Student t
  double ci_high = 0.0;
  bool degenerate = false;
  std::size_t count = 0;
};

/// Slope of log(amplitude_star) against log(nu). Needs >= 4 records.
BetaFit beta_fit(const std::vector<ThresholdRecord>& records);

std::string probe_csv_header();
std::string probe_csv_row(const ProbeResult& p);

}  // namespace tcflow
