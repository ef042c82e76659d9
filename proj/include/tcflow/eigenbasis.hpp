#pragma once

#include "tcflow/operators.hpp"

#include <vector>

namespace tcflow {

/// psi_l(r) = alpha r^{1/2} sin(beta l log r), l = 1 .. l_max, orthonormal for the weight 1/r^2 and
/// satisfying (d_r^2 - (k^2 - 1/4) / r^2) psi_l = -lambda_{k,l} psi_l / r^2.
struct WeightedBasis {
  GridPtr grid;
  double R = 0.0;
  int l_max = 0;
  double alpha = 0.0;  // (2 / log R)^{1/2}
  double beta = 0.0;   // pi / log R
  Mat values;          // n_points x l_max, column l - 1 holds psi_l on the full grid

  double lambda(int k, int l) const { return (beta * l) * (beta * l) + static_cast<double>(k) * k; }
  /// psi_l on the full grid, as a complex vector.
  CVec psi(int l) const;
  CVec psi_interior(int l) const;
};

/// Requires 1 <= l_max <= N / 4.
WeightedBasis build_basis(const GridPtr& grid, int l_max);

struct DampingSum {
  double value = 0.0;
  /// Set when w0 was given on the full grid with nonzero end values.
  bool boundary_warning = false;
};

/// sum_{l <= l_max} |<e^{-ikBt/r^2} w0, psi_l>|^2 / lambda_{k,l}, plain dr inner products.
/// w0 may be interior or full-grid.
DampingSum damping_sum(const CVec& w0, int k, double B, double t, const WeightedBasis& basis);

/// e^{-ikBt/r^2} w0 on interior nodes.
CVec phase_mixed(const RadialGrid& grid, const CVec& w0_interior, int k, double B, double t);

struct DampingRecord {
  int k = 0;
  int n_t = 0;
  double T = 0.0;
  std::vector<double> times;
  std::vector<double> grad_phi;    // ||d_r phi||^2
  std::vector<double> angular_phi; // k^2 ||phi / r||^2
  std::vector<double> running;     // cumulative trapezoid of the two
  double integral = 0.0;
  double initial_norm = 0.0;       // ||r^2 w0||^2
  double ratio = 0.0;              // |kB| |k| (log R)^2 integral / ||r^2 w0||^2
  double oscillations = 0.0;       // radial phase periods of e^{-ikBT/r^2} across [1, R]
  bool resolved = true;            // oscillations <= N / pi
};

/// Time integral over [0, T] for the phase-mixed (inviscid) evolution. Requires T >= 10 / |kB| and
/// n_t >= 200; n_t is raised until the fastest phase advances less than pi/4 per step.
/// Past about N / pi radial periods the grid aliases the mixed profile and the integrand grows
/// again; `resolved` flags that.
DampingRecord integrated_damping(const GridPtr& grid, const CVec& w0, int k, const FlowParams& params,
                                 double T, int n_t = 200);

struct ViscousDampingRecord {
  int k = 0;
  int n_t = 0;
  double T = 0.0;
  double weight_rate = 0.0;
  double grad_phi = 0.0;     // ||e d_r phi||_{L^2 L^2}^2
  double phi_over_r = 0.0;   // ||e phi / r||_{L^2 L^2}^2
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// Same space-time norms for the true evolution e^{-t L_k} w0, weighted by e^{weight_rate t}, against
/// the initial-data functional. weight_rate < 0 selects half the fitted semigroup decay rate.
ViscousDampingRecord viscous_damping_check(const GridPtr& grid, const CVec& w0, int k,
                                           const FlowParams& params, double T, double weight_rate = -1.0);

}  // namespace tcflow
