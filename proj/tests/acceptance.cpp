// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include "tcflow/eigenbasis.hpp"
#include "tcflow/expm.hpp"
#include "tcflow/inequalities.hpp"
#include "tcflow/io.hpp"
#include "tcflow/nonlinear_solver.hpp"
#include "tcflow/regression.hpp"
#include "tcflow/spectral_analysis.hpp"
#include "tcflow/threshold.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace tcflow;
namespace fs = std::filesystem;

namespace {

constexpr double kExponentTolerance = 0.07;
constexpr double kPsiSpreadLimit = 10.0;
constexpr double kGearhartPrussSlack = 1e-6;
constexpr double kGramTolerance = 1e-10;
constexpr double kEigenResidualTolerance = 1e-8;
constexpr double kDampingIdentityTolerance = 1e-8;
constexpr double kRescalingTolerance = 0.05;
constexpr double kLinearTolerance = 1e-6;
constexpr double kDecayRateFloor = 0.1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s | %s | %.1f s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

ExponentFit sweep(SweepVariable var, const std::vector<double>& values, const FlowParams& base, std::string& info) {
  const GridPtr g = build_grid(96, base.R());
  std::vector<DecayFit> fits(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const FlowParams p = var == SweepVariable::Nu ? base.with_nu(values[i]) : base.with_B(values[i]);
    const ModeOperator op = assemble_mode_operator(g, p, 1);
    fits[i] = decay_rate_fit(op, default_time_grid(op));
    info += fmt(fits[i].rate / p.enhanced_rate(1), 3) + (i + 1 < values.size() ? "," : "");
  }
  return scaling_exponent(fits, var);
}

Outcome criterion_nu_exponent() {
  std::string info = "rate/scale=";
  const ExponentFit e = sweep(SweepVariable::Nu, {1e-6, 1e-5, 1e-4, 1e-3}, FlowParams(1e-4, 0.0, 1.0, 2.0), info);
  return {std::abs(e.slope - 1.0 / 3.0) <= kExponentTolerance,
          "slope " + fmt(e.slope) + " +- " + fmt(e.std_error, 2) + " (target 0.333 +- 0.07), " + info};
}

Outcome criterion_B_exponent() {
  std::string info = "rate/scale=";
  const ExponentFit e = sweep(SweepVariable::B, {1, 2, 4, 8, 16}, FlowParams(1e-5, 0.0, 1.0, 2.0), info);
  return {std::abs(e.slope - 2.0 / 3.0) <= kExponentTolerance,
          "slope " + fmt(e.slope) + " +- " + fmt(e.std_error, 2) + " (target 0.667 +- 0.07), " + info};
}

struct SweepPoint {
  ModeOperator op;
  PseudospectralBound pb;
};

std::vector<SweepPoint>& psi_sweep() {
  static std::vector<SweepPoint> points;
  if (!points.empty()) return points;
  for (double R : {2.0, 4.0}) {
    const GridPtr g = build_grid(96, R);
    for (double nu : {1e-5, 1e-4, 1e-3})
      for (double B : {1.0, 4.0, 16.0}) {
        const ModeOperator op = assemble_mode_operator(g, FlowParams(nu, 0.0, B, R), 1);
        points.push_back({op, pseudospectral_bound(op, default_lambda_grid(op))});
      }
  }
  return points;
}

Outcome criterion_psi() {
  double lo = 1e300, hi = 0.0;
  bool witness = true;
  for (const auto& p : psi_sweep()) {
    const double ratio = p.pb.psi / p.op.params.enhanced_rate(1);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    for (const auto& s : p.pb.scan) witness = witness && s.sigma_min >= p.pb.psi;
  }
  const bool pass = hi / lo < kPsiSpreadLimit && lo >= regression::kPsiRatioFloor && witness;
  return {pass, "18 points, ratio in [" + fmt(lo) + ", " + fmt(hi) + "], spread " + fmt(hi / lo) + " (< 10), floor " +
                    fmt(regression::kPsiRatioFloor) + ", witness " + (witness ? "ok" : "violated")};
}

Outcome criterion_gearhart_pruss() {
  double worst = 0.0;
  int checked = 0;
  for (const auto& p : psi_sweep()) {
    const auto times = default_time_grid(p.op, 30);
    std::vector<double> ratio(times.size());
    parallel_for(times.size(), [&](std::size_t i) {
      ratio[i] = semigroup_norm(p.op, times[i]) / std::exp(-times[i] * p.pb.psi + kPi / 2.0);
    });
    for (double r : ratio) worst = std::max(worst, r);
    checked += static_cast<int>(times.size());
  }
  return {worst <= 1.0 + kGearhartPrussSlack,
          std::to_string(checked) + " (point, t) pairs, max norm/bound " + fmt(worst, 6) + " (<= 1 + 1e-6)"};
}

Outcome criterion_basis() {
  const GridPtr g = build_grid(128, 2.0);
  const WeightedBasis b = build_basis(g, 20);
  const Vec w = g->nodes.array().square().inverse();
  double gram = 0.0;
  for (int l = 1; l <= 16; ++l)
    for (int m = 1; m <= 16; ++m)
      gram = std::max(gram, std::abs(weighted_inner(*g, b.psi(l), b.psi(m), w) - (l == m ? 1.0 : 0.0)));
  const int n = g->interior_size();
  const Vec inv_r2 = g->interior_nodes().array().square().inverse();
  double res = 0.0;
  for (int l = 1; l <= 20; ++l) {
    const CVec psi = b.psi(l);
    CVec r = (g->d2.cast<Complex>() * psi).segment(1, n);
    r += ((b.lambda(1, l) - 0.75) * inv_r2).cast<Complex>().cwiseProduct(psi.segment(1, n));
    res = std::max(res, g->l2_norm(r) / g->l2_norm(psi));
  }
  return {gram <= kGramTolerance && res <= kEigenResidualTolerance,
          "gram deviation " + fmt(gram, 3) + " (<= 1e-10), eigen residual " + fmt(res, 3) + " (<= 1e-8)"};
}

Outcome criterion_damping() {
  const GridPtr g = build_grid(192, 2.0);
  const WeightedBasis b = build_basis(g, 48);
  const Vec r = g->interior_nodes();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> kd(1, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    // smooth random profile vanishing to second order at both walls
    Complex c[4];
    for (auto& x : c) x = Complex(normal(rng), normal(rng));
    CVec w0(r.size());
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      const double x = r(j) - 1.0;
      w0(j) = (c[0] + x * (c[1] + x * (c[2] + x * c[3]))) * std::pow(x * (2.0 - r(j)), 2);
    }
    const int k = kd(rng);
    const double B = 0.5 + 2.0 * u(rng);
    const double t = 10.0 * u(rng) / (k * B);
    const CVec wt = phase_mixed(*g, w0, k, B, t);
    const double oracle = -weighted_inner(*g, wt, solve_stream(g, k, wt), Vec::Ones(r.size())).real();
    worst = std::max(worst, std::abs(damping_sum(w0, k, B, t, b).value - oracle) / oracle);
  }

  // T = 100 keeps kBT inside the resolved horizon of the grid for every B.
  CVec bump(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) bump(j) = std::pow((r(j) - 1.0) * (2.0 - r(j)), 2);
  double lo = 1e300, hi = 0.0;
  for (double B : {1.0, 2.0, 4.0}) {
    const DampingRecord d = integrated_damping(g, bump, 1, FlowParams(1e-4, 0.0, B, 2.0), 100.0, 400);
    lo = std::min(lo, d.integral * B);
    hi = std::max(hi, d.integral * B);
  }
  const double spread = hi / lo - 1.0;
  return {worst <= kDampingIdentityTolerance && spread <= kRescalingTolerance,
          "20 triples, max rel err " + fmt(worst, 3) + " (<= 1e-8); integral*|B| spread " + fmt(spread, 3) +
              " over B in {1,2,4} (<= 5%)"};
}

Outcome criterion_linear() {
  const FlowParams p(1e-3, 0.0, 1.0, 2.0);
  const GridPtr g = build_grid(96, 2.0);
  const double T = 1.0 / p.mu(1);
  const long steps = 200000;
  NonlinearSolver solver(g, p, 1, T / steps, false);
  SpectralState s = zero_state(g, p, 1);
  s.modes[1] = build_basis(g, 1).psi_interior(1);
  const CVec w0 = s.modes[1];
  for (long i = 0; i < steps; ++i) solver.step(s);
  const ModeOperator& op = solver.mode_operator(1);
  const CVec exact = op.to_nodal(expm(-T * op.matrix) * op.to_orthonormal(w0));
  const double err = g->l2_norm(CVec(s.modes[1] - exact)) / g->l2_norm(exact);
  return {err <= kLinearTolerance, "t = 1/mu_1 = " + fmt(T) + ", dt = " + fmt(T / steps, 3) + ", rel err " +
                                       fmt(err, 3) + " (<= 1e-6)"};
}

Outcome criterion_nonlinear() {
  bool pass = true;
  std::string detail;
  for (double nu : {1e-5, 1e-4, 1e-3}) {
    ThresholdConfig c;
    c.sim.params = FlowParams(nu, 0.0, 1.0, 2.0);
    c.sim.K = 16;
    c.sim.N = 96;
    const double scale = std::sqrt(nu) / 4.0;
    const ProbeResult r = stability_probe(c, 0.01 * scale);
    const bool rate_ok = r.fitted_rate >= kDecayRateFloor * c.sim.params.enhanced_rate(1);
    const double mean_cap = 2.0 * r.initial_mean + regression::kMeanGrowth * r.initial_functional;
    const bool ok = r.verdict == Verdict::Stable && rate_ok && r.max_mean <= mean_cap;
    pass = pass && ok;
    detail += "nu=" + fmt(nu, 1) + ": " + to_string(r.verdict) + ", rate/scale " +
              fmt(r.fitted_rate / c.sim.params.enhanced_rate(1), 3) + ", max mean/cap " + fmt(r.max_mean / mean_cap, 3) +
              "; ";
  }
  return {pass, detail};
}

Outcome criterion_inequalities() {
  bool pass = true;
  double worst = 0.0;
  std::string which;
  int count = 0;
  for (double R : {1.5, 2.0, 4.0}) {
    const GridPtr g = build_grid(128, R);
    std::vector<LemmaReport> all = check_sobolev_a1(1000, *g, 1);
    for (auto&& batch : {check_weighted_linf_a2(1000, *g, 1), check_poincare_a5(1000, *g, 1)})
      all.insert(all.end(), batch.begin(), batch.end());
    for (const auto& r : all) {
      pass = pass && r.pass;
      ++count;
      if (r.worst_ratio > worst) {
        worst = r.worst_ratio;
        which = r.name + " at R=" + fmt(R, 2);
      }
    }
  }
  return {pass, std::to_string(count) + " lemma/R reports of 1000 samples, worst ratio " + fmt(worst, 6) + " (" +
                    which + ", <= 1 + 1e-6)"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TCFLOW_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / "tcflow_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"resolvent", R"({"nu": 1e-3, "N": 48})"},
      {"pseudospectrum", R"({"nu": [1e-4, 1e-3], "B": [1, 4], "R": [2], "N": 48})"},
      {"semigroup", R"({"nu": 1e-3, "N": 48, "t_count": 10})"},
      {"rates", R"({"sweep": "nu", "values": [1e-5, 1e-4, 1e-3, 1e-2], "N": 48})"},
      {"basis", R"({"R": 2.0, "N": 128})"},
      {"damping", R"({"nu": 1e-3, "N": 48, "T": 40})"},
      {"simulate", R"({"nu": 1e-3, "K": 4, "N": 32, "T": 100, "samples": 50})"},
      {"threshold", R"({"nu": 1e-3, "K": 4, "N": 32, "ladder": [0.1, 1000, 100000], "iters": 2, "samples": 50})"},
      {"inequalities", R"({"R_values": [2.0], "N": 64, "samples": 100})"},
  };
  int identical = 0;
  std::string bad;
  for (const auto& [cmd, cfg] : runs) {
    const fs::path c = root / (cmd + ".json");
    std::ofstream(c) << cfg;
    std::string texts[2][2];
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (cmd + std::to_string(rep));
      const int code = run_cli(cmd + " --config " + c.string() + " --seed 7 --out " + out.string());
      if (code != 0 && code != 1) ran = false;
      try {
        texts[rep][0] = read_text_file((out / (cmd + ".csv")).string());
        texts[rep][1] = read_text_file((out / (cmd + ".json")).string());
      } catch (const std::exception&) {
        ran = false;
      }
    }
    if (ran && texts[0][0] == texts[1][0] && texts[0][1] == texts[1][1] && !texts[0][0].empty())
      ++identical;
    else
      bad += cmd + " ";
  }
  fs::remove_all(root);
  return {identical == static_cast<int>(runs.size()),
          std::to_string(identical) + "/" + std::to_string(runs.size()) + " subcommands byte-identical" +
              (bad.empty() ? "" : ", differing: " + bad)};
}

}  // namespace

int main() {
  report(1, "nu exponent of the decay rate", criterion_nu_exponent);
  report(2, "|B| exponent of the decay rate", criterion_B_exponent);
  report(3, "pseudospectral bound tracks the enhanced scale", criterion_psi);
  report(4, "Gearhart-Pruss bound on every sweep point", criterion_gearhart_pruss);
  report(5, "eigenbasis orthonormality and eigen relation", criterion_basis);
  report(6, "damping identity and B rescaling", criterion_damping);
  report(7, "linear stepper against the matrix exponential", criterion_linear);
  report(8, "small data stays stable across nu", criterion_nonlinear);
  report(9, "explicit-constant inequalities", criterion_inequalities);
  report(10, "byte-identical reruns of every subcommand", criterion_determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
