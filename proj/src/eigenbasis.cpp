#include "tcflow/eigenbasis.hpp"

#include "tcflow/expm.hpp"
#include "tcflow/spectral_analysis.hpp"

#include <cmath>

namespace tcflow {

namespace {

CVec interior_of(const RadialGrid& grid, const CVec& w0, bool* warning) {
  const int m = grid.interior_size();
  if (w0.size() == m) return w0;
  if (w0.size() != grid.n_points) throw ShapeError("w0 must be interior or full-grid");
  if (warning) *warning = w0(0) != Complex(0.0) || w0(grid.n_points - 1) != Complex(0.0);
  return w0.segment(1, m);
}

double sq(double x) { return x * x; }

double weighted_sq_norm(const RadialGrid& grid, const CVec& full, const Vec& weight) {
  return weighted_inner(grid, full, full, weight).real();
}

int step_count(double T, int n_t, double phase_speed, double decay) {
  const double by_phase = T * phase_speed / (kPi / 4.0);
  const double by_decay = T * decay / 0.05;
  return std::max({n_t, static_cast<int>(std::ceil(by_phase)) + 1, static_cast<int>(std::ceil(by_decay)) + 1});
}

}  // namespace

CVec WeightedBasis::psi(int l) const {
  if (l < 1 || l > l_max) throw DomainError("psi: l out of range");
  return values.col(l - 1).cast<Complex>();
}

CVec WeightedBasis::psi_interior(int l) const { return psi(l).segment(1, grid->interior_size()); }

WeightedBasis build_basis(const GridPtr& grid, int l_max) {
  if (l_max < 1) throw ConfigError("build_basis: l_max must be >= 1");
  if (l_max > grid->degree() / 4)
    throw ConfigError("build_basis: l_max = " + std::to_string(l_max) + " exceeds N/4 = " +
                      std::to_string(grid->degree() / 4));
  WeightedBasis b;
  b.grid = grid;
  b.R = grid->R;
  b.l_max = l_max;
  const double logr = std::log(grid->R);
  b.alpha = std::sqrt(2.0 / logr);
  b.beta = kPi / logr;
  b.values = Mat::Zero(grid->n_points, l_max);
  for (int j = 1; j + 1 < grid->n_points; ++j) {
    const double r = grid->nodes(j);
    for (int l = 1; l <= l_max; ++l) b.values(j, l - 1) = b.alpha * std::sqrt(r) * std::sin(b.beta * l * std::log(r));
  }
  return b;
}

CVec phase_mixed(const RadialGrid& grid, const CVec& w0_interior, int k, double B, double t) {
  const Vec r = grid.interior_nodes();
  CVec out(w0_interior.size());
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out(j) = std::polar(1.0, -k * B * t / (r(j) * r(j))) * w0_interior(j);
  return out;
}

DampingSum damping_sum(const CVec& w0, int k, double B, double t, const WeightedBasis& basis) {
  const RadialGrid& grid = *basis.grid;
  DampingSum out;
  const CVec wt = phase_mixed(grid, interior_of(grid, w0, &out.boundary_warning), k, B, t);
  const Vec q = grid.interior_weights();
  for (int l = 1; l <= basis.l_max; ++l) {
    const Vec psi = basis.values.col(l - 1).segment(1, grid.interior_size());
    const Complex c = (wt.array() * psi.array() * q.array()).sum();
    out.value += std::norm(c) / basis.lambda(k, l);
  }
  return out;
}

DampingRecord integrated_damping(const GridPtr& grid, const CVec& w0, int k, const FlowParams& params,
                                 double T, int n_t) {
  const double kb = k * params.B();
  if (k == 0) throw DomainError("integrated_damping: k must be nonzero");
  if (n_t < 200) throw ConfigError("integrated_damping: n_t must be >= 200");
  if (!(T >= 10.0 / std::abs(kb))) throw ConfigError("integrated_damping: T must be >= 10 / |kB|");
  const CVec w = interior_of(*grid, w0, nullptr);
  const double R = grid->R;

  DampingRecord rec;
  rec.k = k;
  rec.T = T;
  rec.n_t = step_count(T, n_t, std::abs(kb) * (1.0 - 1.0 / (R * R)), 0.0);
  const int nt = rec.n_t;
  rec.oscillations = std::abs(kb) * T * (1.0 - 1.0 / (R * R)) / (2.0 * kPi);
  rec.resolved = rec.oscillations <= grid->degree() / kPi;
  rec.times.resize(nt);
  rec.grad_phi.resize(nt);
  rec.angular_phi.resize(nt);
  rec.running.assign(nt, 0.0);
  rec.initial_norm = weighted_sq_norm(*grid, grid->extend(w), grid->nodes.array().pow(4).matrix());
  if (rec.initial_norm == 0.0) {
    for (int i = 0; i < nt; ++i) rec.times[i] = T * i / (nt - 1);
    return rec;
  }

  const StreamSolver solver(grid, k);
  const Vec inv_r2 = grid->interior_nodes().array().square().inverse();
  parallel_for(nt, [&](std::size_t i) {
    const double t = T * static_cast<double>(i) / (nt - 1);
    const CVec phi = solver.solve(phase_mixed(*grid, w, k, params.B(), t));
    rec.times[i] = t;
    rec.grad_phi[i] = sq(grid->l2_norm(derivative_of_interior(*grid, phi)));
    rec.angular_phi[i] = k * k * (phi.array().abs2() * inv_r2.array() * grid->interior_weights().array()).sum();
  });
  for (int i = 1; i < nt; ++i) {
    const double dt = rec.times[i] - rec.times[i - 1];
    rec.running[i] = rec.running[i - 1] +
                     0.5 * dt * (rec.grad_phi[i] + rec.angular_phi[i] + rec.grad_phi[i - 1] + rec.angular_phi[i - 1]);
  }
  rec.integral = rec.running.back();
  rec.ratio = std::abs(kb) * std::abs(k) * sq(std::log(R)) * rec.integral / rec.initial_norm;
  return rec;
}

ViscousDampingRecord viscous_damping_check(const GridPtr& grid, const CVec& w0, int k,
                                           const FlowParams& params, double T, double weight_rate) {
  const double kb = k * params.B();
  if (k == 0) throw DomainError("viscous_damping_check: k must be nonzero");
  if (!(T >= 10.0 / std::abs(kb))) throw ConfigError("viscous_damping_check: T must be >= 10 / |kB|");
  const CVec w = interior_of(*grid, w0, nullptr);
  const ModeOperator op = assemble_mode_operator(grid, params, k);
  const double R = grid->R;

  ViscousDampingRecord rec;
  rec.k = k;
  rec.T = T;
  rec.weight_rate = weight_rate >= 0.0 ? weight_rate : 0.5 * decay_rate_fit(op, default_time_grid(op)).rate;

  const CVec full = grid->extend(w);
  const Vec r = grid->nodes;
  const double nu = params.nu();
  const double q = nu / std::abs(kb);
  const double logr = std::log(R);
  const double k4 = std::pow(static_cast<double>(k), 4);
  const double n_r4 = weighted_sq_norm(*grid, full, r.array().pow(4).matrix());
  const double n_rm6 = weighted_sq_norm(*grid, full, r.array().pow(-6).matrix());
  const double n_dw = sq(grid->l2_norm(derivative_of_interior(*grid, w)));
  const double n_r2 = weighted_sq_norm(*grid, full, r.array().square().matrix());
  const double n_rm2 = weighted_sq_norm(*grid, full, r.array().pow(-2).matrix());
  rec.rhs = n_r4 / (sq(logr) * std::pow(R, 4)) + std::pow(R, 6) * n_rm6 + std::pow(q, 2.0 / 3.0) * sq(R) * n_dw +
            (std::cbrt(q) * logr + 1.0) * (n_r2 / sq(R) + std::pow(q, 4.0 / 3.0) * k4 * sq(R) * n_rm2);
  if (rec.rhs == 0.0) return rec;

  rec.n_t = step_count(T, 200, std::abs(kb) * (1.0 - 1.0 / (R * R)), 2.0 * op.params.mu(k) + rec.weight_rate);
  const double dt = T / (rec.n_t - 1);
  const CMat prop = expm(-dt * op.matrix);
  const StreamSolver solver(grid, k);
  const Vec inv_r2 = grid->interior_nodes().array().square().inverse();
  CVec v = op.to_orthonormal(w);
  double prev_grad = 0.0, prev_ang = 0.0;
  for (int i = 0; i < rec.n_t; ++i) {
    const double t = dt * i;
    if (i > 0) v = prop * v;
    const CVec phi = solver.solve(op.to_nodal(v));
    const double weight = std::exp(2.0 * rec.weight_rate * t);
    const double g = weight * sq(grid->l2_norm(derivative_of_interior(*grid, phi)));
    const double a = weight * (phi.array().abs2() * inv_r2.array() * grid->interior_weights().array()).sum();
    if (i > 0) {
      rec.grad_phi += 0.5 * dt * (g + prev_grad);
      rec.phi_over_r += 0.5 * dt * (a + prev_ang);
    }
    prev_grad = g;
    prev_ang = a;
  }
  const double k2 = static_cast<double>(k) * k;
  rec.lhs = k2 * std::abs(params.B()) / std::pow(R, 4) * (rec.grad_phi + k2 * rec.phi_over_r);
  rec.ratio = rec.lhs / rec.rhs;
  return rec;
}

}  // namespace tcflow
