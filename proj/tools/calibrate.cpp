// Prints the raw extremes the frozen regression constants were taken from.
// Usage: tcflow_calibrate [section ...]   sections: inequalities psi forced damping transfer simulate

#include "tcflow/eigenbasis.hpp"
#include "tcflow/inequalities.hpp"
#include "tcflow/nonlinear_solver.hpp"
#include "tcflow/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

using namespace tcflow;

namespace {

void inequalities() {
  for (double R : {1.5, 2.0, 4.0}) {
    const GridPtr g = build_grid(128, R);
    std::vector<LemmaReport> reps = check_elliptic_a4(10000, g, 1);
    for (const LemmaReport& r : check_elliptic_a6(10000, g, 1)) reps.push_back(r);
    for (const LemmaReport& r : reps)
      std::printf("%-10s R=%-4g worst %.6f (frozen %.3f)\n", r.name.c_str(), R, r.worst_ratio, r.bound);
  }
}

void psi() {
  double lo = 1e300, hi = 0.0;
  for (double R : {2.0, 4.0}) {
    const GridPtr g = build_grid(96, R);
    for (double nu : {1e-5, 1e-4, 1e-3})
      for (double B : {1.0, 4.0, 16.0}) {
        const ModeOperator op = assemble_mode_operator(g, FlowParams(nu, 0.0, B, R), 1);
        const double ratio = pseudospectral_bound(op, default_lambda_grid(op)).psi / op.params.enhanced_rate(1);
        std::printf("psi ratio nu=%g B=%g R=%g: %.5f\n", nu, B, R, ratio);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
  }
  std::printf("psi ratio range [%.5f, %.5f], spread %.4f\n", lo, hi, hi / lo);
}

void forced() {
  for (double nu : {1e-3, 1e-4})
    for (int k : {1, 2}) {
      const GridPtr g = build_grid(48, 2.0);
      const ModeOperator op = assemble_mode_operator(g, FlowParams(nu, 0.0, 1.0, 2.0), k);
      CVec prof(g->n_points);
      for (int j = 0; j < g->n_points; ++j) prof(j) = std::pow((g->nodes(j) - 1.0) * (2.0 - g->nodes(j)), 2);
      std::vector<double> t(1601);
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.25 * i;
      ForcedProblem fp;
      fp.h1 = [&](double s) { return CVec(std::exp(-s) * prof); };
      std::printf("forced nu=%g k=%d: ratio %.5f\n", nu, k, forced_response(op, fp, t).ratio);
    }
}

CVec profile(const RadialGrid& g, bool bump) {
  const Vec r = g.interior_nodes();
  CVec w(r.size());
  const double logr = std::log(g.R);
  for (Eigen::Index j = 0; j < r.size(); ++j)
    w(j) = bump ? std::pow((r(j) - 1.0) * (g.R - r(j)), 2)
                : std::sqrt(r(j)) * std::sin(kPi * std::log(r(j)) / logr);
  return w / g.l2_norm(w);
}

void damping() {
  for (double R : {2.0, 4.0})
    for (bool bump : {true, false})
      for (int k : {1, 2}) {
        const GridPtr g = build_grid(192, R);
        const FlowParams p(1e-4, 0.0, 1.0, R);
        const CVec w0 = profile(*g, bump);
        const DampingRecord d = integrated_damping(g, w0, k, p, 200.0 / k, 400);
        const ViscousDampingRecord v = viscous_damping_check(g, w0, k, p, 10.0 / p.enhanced_rate(k));
        std::printf("damping %s R=%g k=%d: integrated %.5f (resolved %d), viscous %.5f\n", bump ? "bump" : "psi1", R, k,
                    d.ratio, d.resolved ? 1 : 0, v.ratio);
      }
}

void transfer() {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const GridPtr g = build_grid(96, 2.0);
    const FlowParams p(1e-3, 0.0, 1.0, 2.0);
    const NonlinearSolver solver(g, p, 6, 0.01);
    const SpectralState s = initial_profile(g, p, 6, "random", seed);
    const auto N = solver.nonlinear_forcing(s);
    const Vec q = g->interior_weights();
    double tr = 0.0, scale = 0.0;
    for (int k = 0; k <= 6; ++k) {
      const double c = k == 0 ? 1.0 : 2.0;
      tr += c * (N[k].array() * s.modes[k].conjugate().array() * q.array()).sum().real();
      scale += c * g->l2_norm(N[k]) * g->l2_norm(s.modes[k]);
    }
    std::printf("transfer seed=%llu: %.3e\n", static_cast<unsigned long long>(seed), std::abs(tr) / scale);
  }
}

void simulate_runs() {
  struct Run {
    double nu;
    int K, N;
  };
  for (const Run run : {Run{1e-3, 8, 64}, Run{1e-3, 16, 96}, Run{1e-4, 16, 96}, Run{1e-5, 16, 96}}) {
    SimulationConfig c;
    c.params = FlowParams(run.nu, 0.0, 1.0, 2.0);
    c.K = run.K;
    c.N = run.N;
    c.amplitude = 0.01 * std::sqrt(run.nu) / 4.0;
    const SimulationResult r = simulate(c);
    double pref = 0.0, mean_excess = 0.0;
    for (const DiagnosticSample& d : r.samples) {
      pref = std::max(pref, d.nonzero_norm / (r.initial_nonzero * std::exp(-0.5 * c.params.mu(1) * d.t)));
      mean_excess = std::max(mean_excess, (d.mean_norm - 2.0 * r.initial_mean) / r.initial_functional);
    }
    std::printf("simulate nu=%g K=%d N=%d: fitted/g %.4f, prefactor at 0.5 mu_1 %.4f, mean excess / E(0) %.3e, "
                "max_mean/initial_mean %.4f\n",
                run.nu, run.K, run.N, r.fitted_rate / c.params.enhanced_rate(1), pref, mean_excess, r.max_mean / r.initial_mean);
  }
  // zero initial mean: whatever mean appears is fed by the nonlinear transfer
  for (double nu : {1e-3, 1e-4}) {
    SimulationConfig c;
    c.params = FlowParams(nu, 0.0, 1.0, 2.0);
    c.K = 8;
    c.N = 64;
    c.profile = "mode1";
    for (double f : {0.01, 1.0}) {
      c.amplitude = f * std::sqrt(nu) / 4.0;
      const SimulationResult r = simulate(c);
      std::printf("simulate mode1 nu=%g amplitude %g x scale: max_mean / E(0) %.3e\n", nu, f,
                  r.max_mean / r.initial_functional);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> want(argv + 1, argv + argc);
  const auto on = [&](const char* s) { return want.empty() || want.count(s) > 0; };
  if (on("inequalities")) inequalities();
  if (on("psi")) psi();
  if (on("forced")) forced();
  if (on("damping")) damping();
  if (on("transfer")) transfer();
  if (on("simulate")) simulate_runs();
}
