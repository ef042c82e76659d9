#include "tcflow/operators.hpp"

#include <cmath>
#include <limits>

namespace tcflow {

FlowParams::FlowParams(double nu, double A, double B, double R) : nu_(nu), A_(A), B_(B), R_(R) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("FlowParams: nu must be > 0");
  if (!std::isfinite(A)) throw ConfigError("FlowParams: A must be finite");
  if (B == 0.0 || !std::isfinite(B)) throw ConfigError("FlowParams: B must be nonzero");
  if (!(R > 1.0) || !std::isfinite(R)) throw ConfigError("FlowParams: R must be > 1");
}

FlowParams FlowParams::shear_free(double nu, double A, double R) {
  const FlowParams checked(nu, A, 1.0, R);
  return FlowParams(Unchecked{}, checked.nu_, checked.A_, 0.0, checked.R_);
}

double FlowParams::enhanced_rate(int k) const {
  return std::cbrt(nu_ * k * k) * std::pow(std::abs(B_), 2.0 / 3.0) / (R_ * R_);
}

double FlowParams::mu(int k) const {
  return std::max(enhanced_rate(k), nu_ * k * k / (R_ * R_));
}

double FlowParams::regime_ratio() const {
  if (B_ == 0.0) return std::numeric_limits<double>::infinity();
  return std::log(R_) / (std::cbrt(std::abs(B_)) / std::cbrt(nu_));
}

ModeOperator assemble_mode_operator(const GridPtr& grid, const FlowParams& params, int k) {
  if (std::abs(grid->R - params.R()) > 1e-14 * params.R())
    throw ConfigError("assemble_mode_operator: grid and params disagree on R");
  const int m = grid->interior_size();
  const Vec r = grid->interior_nodes();
  const Vec inv_r2 = r.array().square().inverse();
  const double nu = params.nu();
  const double kb = k * params.B();
  const double angular = k * k - 0.25;

  Mat viscous = -nu * grid->d2.block(1, 1, m, m);
  viscous.diagonal() += nu * angular * inv_r2;

  ModeOperator op;
  op.k = k;
  op.params = params;
  op.grid = grid;
  op.sqrt_weights = grid->interior_weights().cwiseSqrt();
  op.collocation = viscous.cast<Complex>();
  op.collocation.diagonal() += Complex(0.0, kb) * inv_r2;

  // W^{1/2} V W^{-1/2} is symmetric because W d2 is; average to remove rounding asymmetry.
  Mat sym = op.sqrt_weights.asDiagonal() * viscous * op.sqrt_weights.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  op.matrix = sym.cast<Complex>();
  op.matrix.diagonal() += Complex(0.0, kb) * inv_r2;
  return op;
}

CVec apply_mode_operator(const ModeOperator& op, const CVec& v) {
  if (v.size() != op.size()) throw ShapeError("apply_mode_operator: vector length mismatch");
  return op.collocation * v;
}

StreamSolver::StreamSolver(const GridPtr& grid, int k) : grid_(grid), k_(k) {
  if (k == 0) throw DomainError("solve_stream: k = 0 uses the axisymmetric elliptic problem");
  const int m = grid->interior_size();
  const Vec r = grid->interior_nodes();
  op_ = grid->d2.block(1, 1, m, m);
  op_.diagonal() -= ((k * k - 0.25) * r.array().square().inverse()).matrix();
  lu_.compute(op_);
}

CVec StreamSolver::solve(const CVec& w) const {
  if (w.size() != op_.rows()) throw ShapeError("solve_stream: vector length mismatch");
  CVec phi(w.size());
  phi.real() = lu_.solve(Vec(w.real()));
  phi.imag() = lu_.solve(Vec(w.imag()));
  return phi;
}

CVec StreamSolver::apply(const CVec& phi) const {
  if (phi.size() != op_.rows()) throw ShapeError("StreamSolver::apply: vector length mismatch");
  return op_.cast<Complex>() * phi;
}

ZeroModeStreamSolver::ZeroModeStreamSolver(const GridPtr& grid) : grid_(grid) {
  const int m = grid->interior_size();
  const Vec inv_r = grid->interior_nodes().cwiseInverse();
  op_ = grid->d2.block(1, 1, m, m) + inv_r.asDiagonal() * grid->d1.block(1, 1, m, m);
  lu_.compute(op_);
}

CVec ZeroModeStreamSolver::solve(const CVec& w) const {
  if (w.size() != op_.rows()) throw ShapeError("zero-mode stream: vector length mismatch");
  CVec phi(w.size());
  phi.real() = lu_.solve(Vec(w.real()));
  phi.imag() = lu_.solve(Vec(w.imag()));
  return phi;
}

CVec ZeroModeStreamSolver::apply(const CVec& phi) const {
  if (phi.size() != op_.rows()) throw ShapeError("zero-mode stream: vector length mismatch");
  return op_.cast<Complex>() * phi;
}

CVec solve_stream(const GridPtr& grid, int k, const CVec& w) { return StreamSolver(grid, k).solve(w); }

std::pair<double, double> boundary_curvature(const RadialGrid& grid, const CVec& w) {
  const CVec full = grid.extend(w);
  const int last = grid.n_points - 1;
  const Complex outer = grid.d2.row(0).cast<Complex>() * full;
  const Complex inner = grid.d2.row(last).cast<Complex>() * full;
  return {std::abs(outer), std::abs(inner)};
}

}  // namespace tcflow
