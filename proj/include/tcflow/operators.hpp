#pragma once

#include "tcflow/grid.hpp"

#include <Eigen/LU>

namespace tcflow {

/// Physical configuration of the Couette-Taylor base flow u = (A r + B / r) e_theta on
/// 1 <= r <= R with viscosity nu. A only contributes a phase e^{ikAt} and never enters
/// the transformed equations.
class FlowParams {
 public:
  FlowParams() = default;
  FlowParams(double nu, double A, double B, double R);

  /// B = 0, the self-adjoint limit. Only meaningful for the linear operator; the
  /// enhanced-dissipation scales are all zero.
  static FlowParams shear_free(double nu, double A, double R);

  double nu() const { return nu_; }
  double A() const { return A_; }
  double B() const { return B_; }
  double R() const { return R_; }

  /// Background vorticity 2A.
  double omega() const { return 2.0 * A_; }
  bool low_frequency(int k) const { return nu_ * k * k <= std::abs(B_); }
  /// (nu k^2)^{1/3} |B|^{2/3} R^{-2}, the enhanced-dissipation rate scale of mode k.
  double enhanced_rate(int k) const;
  /// max{(nu k^2)^{1/3} |B|^{2/3} R^{-2}, nu k^2 R^{-2}}.
  double mu(int k) const;
  /// log R / (nu^{-1/3} |B|^{1/3}); the large-R hypothesis is read with constant 1.
  double regime_ratio() const;
  bool in_regime() const { return regime_ratio() <= 1.0; }

  FlowParams with_nu(double nu) const { return {nu, A_, B_, R_}; }
  FlowParams with_B(double B) const { return {nu_, A_, B, R_}; }
  FlowParams with_A(double A) const { return {nu_, A, B_, R_}; }

  bool operator==(const FlowParams&) const = default;

 private:
  struct Unchecked {};
  FlowParams(Unchecked, double nu, double A, double B, double R) : nu_(nu), A_(A), B_(B), R_(R) {}

  double nu_ = 1.0;
  double A_ = 0.0;
  double B_ = 1.0;
  double R_ = 2.0;
};

/// L_k = -nu (d_r^2 - (k^2 - 1/4) / r^2) + i k B / r^2 on the interior nodes (w = 0 at r = 1, R).
///
/// `collocation` acts on nodal values. `matrix` is the same operator in coordinates that
/// are orthonormal for the quadrature inner product, v -> W^{1/2} v; its Hermitian part is
/// the (symmetric, positive definite) viscous block and its anti-Hermitian part is exactly
/// diag(i k B / r_j^2). Norms, singular values and exponentials are taken of `matrix`.
struct ModeOperator {
  int k = 0;
  FlowParams params;
  GridPtr grid;
  CMat matrix;
  CMat collocation;
  Vec sqrt_weights;  // W^{1/2} on interior nodes

  int size() const { return static_cast<int>(matrix.rows()); }
  CVec to_orthonormal(const CVec& nodal) const { return sqrt_weights.cwiseProduct(nodal); }
  CVec to_nodal(const CVec& orthonormal) const { return orthonormal.cwiseQuotient(sqrt_weights); }
};

ModeOperator assemble_mode_operator(const GridPtr& grid, const FlowParams& params, int k);

/// Nodal matrix-vector product L_k v for an interior vector v.
CVec apply_mode_operator(const ModeOperator& op, const CVec& v);

/// Pre-factored Dirichlet solver for (d_r^2 - (k^2 - 1/4) / r^2) phi = w, |k| >= 1.
class StreamSolver {
 public:
  StreamSolver(const GridPtr& grid, int k);
  CVec solve(const CVec& w) const;
  /// (d_r^2 - (k^2 - 1/4) / r^2) phi on interior nodes.
  CVec apply(const CVec& phi) const;
  int k() const { return k_; }

 private:
  GridPtr grid_;
  int k_;
  Mat op_;
  Eigen::PartialPivLU<Mat> lu_;
};

/// Pre-factored Dirichlet solver for the axisymmetric problem (d_r^2 + (1/r) d_r) phi = w.
class ZeroModeStreamSolver {
 public:
  explicit ZeroModeStreamSolver(const GridPtr& grid);
  CVec solve(const CVec& w) const;
  CVec apply(const CVec& phi) const;

 private:
  GridPtr grid_;
  Mat op_;
  Eigen::PartialPivLU<Mat> lu_;
};

/// Single-shot stream-function solve. Throws DomainError for k = 0.
CVec solve_stream(const GridPtr& grid, int k, const CVec& w);

/// d_r^2 w at r = R and r = 1 for an interior vector extended by zero. The dynamics force
/// this to vanish; it is monitored, never imposed.
std::pair<double, double> boundary_curvature(const RadialGrid& grid, const CVec& w);

}  // namespace tcflow
