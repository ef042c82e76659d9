#pragma once

#include "tcflow/imex.hpp"
#include "tcflow/operators.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tcflow {

/// Truncated Fourier state. Only k = 0 .. K are stored; w_{-k} = conj(w_k) is implied, so the
/// field is real by construction. Mode k holds the weighted variable w_k = r^{1/2} (vorticity mode)
/// on interior nodes; mode 0 is therefore r^{1/2} times the angular mean and is kept real.
struct SpectralState {
  int K = 0;
  double time = 0.0;
  FlowParams params;
  GridPtr grid;
  std::vector<CVec> modes;

  /// w_k for -K <= k <= K.
  CVec mode(int k) const;
  /// sum over k = -K .. K of ||w_k||^2 (Parseval without the 2 pi factor).
  double enstrophy() const;
  /// ||w - mean||, all k != 0.
  double nonzero_norm() const;
  /// ||mean|| = ||w_0||.
  double mean_norm() const;
};

SpectralState zero_state(const GridPtr& grid, const FlowParams& params, int K);

struct NonlinearTerms {
  CVec f1;
  CVec f2;
};

struct SimulationConfig {
  FlowParams params{1e-4, 0.0, 1.0, 2.0};
  int K = 16;
  int N = 96;
  double dt = 0.0;   // 0 selects min(0.1 / mu_K, cfl / fastest advective rate)
  double cfl = 0.5;
  double T = 0.0;    // 0 selects 10 / mu_1
  std::string profile = "random";
  double amplitude = 0.0;
  std::uint64_t seed = 1;
  bool nonlinear = true;
  int samples = 400; // approximate number of recorded diagnostic rows
  double c_prime = 0.5;
  /// Stop early once ||w - mean|| exceeds this multiple of its initial value (0 = never).
  double abort_growth = 0.0;
};

/// Checks every field and throws ConfigError naming the offending key.
void validate(const SimulationConfig& config);

/// Stepper for the full perturbation system
///   dw_k/dt + L_k w_k + (1/r) [ i k f1 - r^{1/2} d_r (r^{1/2} f2) ] = 0.
/// L_k is implicit (BDF2, Euler start); the nonlinear term is extrapolated.
class NonlinearSolver {
 public:
  NonlinearSolver(const GridPtr& grid, const FlowParams& params, int K, double dt, bool nonlinear = true);

  double dt() const { return dt_; }
  int K() const { return K_; }

  /// Mode-k convolution sums over |l|, |k - l| <= K. Throws DomainError for |k| > K.
  NonlinearTerms nonlinear_terms(const SpectralState& state, int k) const;
  /// N_k = (1/r) [ i k f1 - r^{1/2} d_r (r^{1/2} f2) ] for k = 0 .. K.
  std::vector<CVec> nonlinear_forcing(const SpectralState& state) const;
  /// Source of the angular-mean equation, r^{-1/2} N_0 (real).
  CVec zero_mode_source(const SpectralState& state) const;

  /// Advances all modes by dt. The first call after construction or reset() is an Euler step.
  /// Throws IntegrationFailure and leaves `state` untouched if the update is not finite.
  void step(SpectralState& state);
  /// Angular mean, w_= = r^{-1/2} w_0, advanced by the polar diffusion operator
  /// -nu (d_r^2 + (1/r) d_r) with explicit source. Returns the new weighted w_0.
  CVec step_zero_mode(const CVec& w0, const CVec& w0_prev, const CVec& source, const CVec& source_prev,
                      bool euler) const;
  void reset() { history_ = false; }

  /// sum_k Re <L_k w_k, w_k> over k = -K .. K with quadrature weights.
  double dissipation(const SpectralState& state) const;
  const ModeOperator& mode_operator(int k) const { return ops_.at(k); }

 private:
  std::vector<CVec> stream_functions(const SpectralState& state) const;

  GridPtr grid_;
  FlowParams params_;
  int K_;
  double dt_;
  bool nonlinear_;
  std::vector<ModeOperator> ops_;
  std::vector<StreamSolver> stream_;
  ZeroModeStreamSolver zero_stream_;
  std::vector<ModeStepper> steppers_;
  ModeStepper zero_stepper_;
  Vec sqrt_r_;
  bool history_ = false;
  std::vector<CVec> prev_modes_;
  std::vector<CVec> prev_forcing_;
};

/// Named initial perturbations, normalised to unit enstrophy norm.
///   "mode1":  w_1 = psi_1 (single conjugate pair, zero mean)
///   "random": k = 0 .. min(K, 4), radial shapes psi_1 .. psi_4 with standard normal coefficients
///             scaled by 2^{-(k + l - 1)}; mt19937_64 seeded with `seed`; the mean part is real
///   "mean":   w_0 = psi_1 only
SpectralState initial_profile(const GridPtr& grid, const FlowParams& params, int K, const std::string& profile,
                              std::uint64_t seed);

/// R ||w||_{L^2 H^1} + R^{-2} (log R)^{-3/2} ||r^2 w|| + R^3 ||w / r^3||, summed over modes.
double initial_functional(const SpectralState& state);

/// Default step: min(0.1 / mu_K, cfl / rate) where rate is the larger of the angular advection
/// rate (|B| / r^2 plus perturbation angular speed, per 2 pi / (3K)) and the radial rate |u_r| / dr.
double default_time_step(const SpectralState& state, double cfl);

struct DiagnosticSample {
  double t = 0.0;
  double nonzero_norm = 0.0;
  double mean_norm = 0.0;
  double enstrophy = 0.0;
  /// d/dt enstrophy + 2 dissipation, central difference in time.
  double enstrophy_residual = 0.0;
  /// Largest |d_r^2 w_k| at the walls, monitored only.
  double boundary_curvature = 0.0;
  /// Running E_0 .. E_K.
  std::vector<double> energies;
};

struct SimulationResult {
  SimulationConfig config;
  double dt = 0.0;
  long steps = 0;
  std::vector<double> mu;  // mu_0 .. mu_K (mu_0 = 0)
  std::vector<DiagnosticSample> samples;
  double initial_nonzero = 0.0;
  double initial_mean = 0.0;
  double initial_functional = 0.0;
  double max_growth = 0.0;  // max ||w - mean||(t) / ||w - mean||(0)
  double max_mean = 0.0;
  double final_ratio = 0.0; // ||w - mean||(T) / ||w - mean||(0)
  double fitted_rate = 0.0; // decay rate of ||w - mean|| on t in [2, 20] / enhanced_rate(1), capped at T
  double fit_r_squared = 0.0;
  double mode1_rate = 0.0;  // same fit for ||w_1||
  bool failed = false;
  double failure_time = 0.0;
  std::string failure_reason;
  bool aborted = false;
  SpectralState final_state;
};

SimulationResult simulate(const SimulationConfig& config);

/// Rows: t, norm_nonzero, norm_mean, enstrophy, enstrophy_residual, boundary_curvature, E_0 .. E_K.
std::string diagnostics_csv_header(int K);
std::string diagnostics_csv_row(const DiagnosticSample& s);

}  // namespace tcflow
