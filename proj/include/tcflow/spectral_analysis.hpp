#pragma once

#include "tcflow/operators.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace tcflow {

/// One evaluation of the shifted operator L_k - i lambda.
struct ResolventProbe {
  double lambda = 0.0;
  double sigma_min = 0.0;
  /// | ||(L - i lambda) v|| - sigma_min | for the computed right singular vector v.
  double residual = 0.0;
};

/// One row of a parameter, lambda or time sweep. `variable` holds the sweep coordinate
/// (lambda, t, nu or B) and `value` the measured quantity.
struct ScanRecord {
  FlowParams params;
  int k = 0;
  double variable = 0.0;
  double value = 0.0;
  int n_points = 0;
  double r_squared = std::numeric_limits<double>::quiet_NaN();
};

/// Exponential fit log ||e^{-tL}|| ~ log(prefactor) - rate * t on the tail window.
struct DecayFit {
  FlowParams params;
  int k = 0;
  int n_points = 0;
  double rate = 0.0;
  double prefactor = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double r_squared = 0.0;
  bool accepted = false;
  std::vector<double> times;
  std::vector<double> norms;
};

struct PseudospectralBound {
  double psi = 0.0;
  double lambda_star = 0.0;
  std::vector<ResolventProbe> scan;
};

enum class SweepVariable { Nu, B };

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double std_error = 0.0;
  bool degenerate = false;
  std::size_t count = 0;
};

/// Smallest singular value of matrix - i lambda I (full SVD).
double sigma_min(const ModeOperator& op, double lambda);
ResolventProbe resolvent_probe(const ModeOperator& op, double lambda);

/// 201 uniform points over kB [R^{-2} - 0.2, 1.2] plus 20 log-spaced tail points per side.
/// For kB = 0 the window is centred on 0 and scaled by the viscous spectrum.
std::vector<double> default_lambda_grid(const ModeOperator& op);

/// Coarse minimum of sigma_min over the grid, then golden-section refinement
/// (refine_iters iterations at most, stopping at 1e-4 relative bracket width).
PseudospectralBound pseudospectral_bound(const ModeOperator& op, const std::vector<double>& lambda_grid,
                                         int refine_iters = 60);

/// ||exp(-t matrix)||_2. Throws DomainError for t < 0.
double semigroup_norm(const ModeOperator& op, double t);

/// Log-spaced times from 0.2 to 50 times 1 / enhanced_rate(k).
std::vector<double> default_time_grid(const ModeOperator& op, int count = 30);

/// Fits the window t in [2, 20] / enhanced_rate(k). accepted == (r_squared >= 0.99).
DecayFit decay_rate_fit(const ModeOperator& op, const std::vector<double>& t_grid);

/// Least-squares slope of log(rate) against log(sweep variable).
ExponentFit scaling_exponent(const std::vector<DecayFit>& records, SweepVariable variable);

/// Inhomogeneous problem dw/dt + L_k w = h1 - g d_r h2 with w(0) = 0.
struct ForcedProblem {
  std::function<CVec(double)> h1;  // full-grid values
  std::function<CVec(double)> h2;  // full-grid values
  Vec g;                           // full-grid values
  CVec initial;                    // must be empty or zero
  /// Exponent of the time weight e^{weight_rate t}. Negative selects half the fitted
  /// semigroup decay rate.
  double weight_rate = -1.0;
};

struct ForcedResponse {
  double weight_rate = 0.0;
  double linf_w = 0.0;      // ||e w||_{L^inf L^2}^2
  double l2_w = 0.0;        // ||e w||_{L^2 L^2}^2
  double l2_dw = 0.0;       // ||e d_r w||_{L^2 L^2}^2
  double l2_w_over_r = 0.0; // ||e w / r||_{L^2 L^2}^2
  double l2_r_h1 = 0.0;     // ||e r h1||_{L^2 L^2}^2
  double l2_g_h2 = 0.0;     // ||e (|g| + r |g'|) h2||_{L^2 L^2}^2
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::vector<double> times;
  std::vector<double> norms;  // ||w(t)||
};

/// Integrates the forced system on a uniform t_grid (starting at t_grid[0]) with the
/// BDF2 stepper of the nonlinear solver, forcing taken at the new time level and zero
/// history before the first point.
ForcedResponse forced_response(const ModeOperator& op, const ForcedProblem& problem,
                               const std::vector<double>& t_grid);

std::string scan_csv_header();
std::string scan_csv_row(const ScanRecord& rec);

}  // namespace tcflow
