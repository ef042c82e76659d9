#include "tcflow/nonlinear_solver.hpp"

#include "tcflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tcflow {

namespace {

double sq(double x) { return x * x; }

Vec sqrt_nodes(const RadialGrid& grid) { return grid.interior_nodes().cwiseSqrt(); }

CVec psi_interior(const RadialGrid& grid, int l) {
  const double logr = std::log(grid.R);
  const double alpha = std::sqrt(2.0 / logr);
  const Vec r = grid.interior_nodes();
  CVec out(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j)
    out(j) = alpha * std::sqrt(r(j)) * std::sin(kPi * l * std::log(r(j)) / logr);
  return out;
}

// Weighted fit of log(values) against t on [lo, hi]; returns {rate, r_squared, used}.
struct TailFit {
  double rate = 0.0;
  double r_squared = 0.0;
  std::size_t used = 0;
};

TailFit fit_tail(const std::vector<double>& t, const std::vector<double>& v, double lo, double hi) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < lo || t[i] > hi || !(v[i] > 0.0)) continue;
    x.push_back(t[i]);
    y.push_back(std::log(v[i]));
  }
  TailFit out;
  out.used = x.size();
  if (x.size() < 3) return out;
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
  if (sxx == 0.0) return out;
  const double slope = sxy / sxx;
  out.rate = -slope;
  out.r_squared = syy > 0.0 ? 1.0 - std::max(0.0, syy - slope * sxy) / syy : 1.0;
  return out;
}

}  // namespace

CVec SpectralState::mode(int k) const {
  if (std::abs(k) > K) throw DomainError("mode index outside [-K, K]");
  return k >= 0 ? modes[k] : CVec(modes[-k].conjugate());
}

double SpectralState::enstrophy() const { return sq(mean_norm()) + sq(nonzero_norm()); }

double SpectralState::nonzero_norm() const {
  double s = 0.0;
  for (int k = 1; k <= K; ++k) s += 2.0 * sq(grid->l2_norm(modes[k]));
  return std::sqrt(s);
}

double SpectralState::mean_norm() const { return grid->l2_norm(modes[0]); }

SpectralState zero_state(const GridPtr& grid, const FlowParams& params, int K) {
  if (K < 0) throw ConfigError("K must be >= 0");
  SpectralState s;
  s.K = K;
  s.params = params;
  s.grid = grid;
  s.modes.assign(K + 1, CVec::Zero(grid->interior_size()));
  return s;
}

void validate(const SimulationConfig& c) {
  if (c.K < 1) throw ConfigError("K: must be >= 1");
  if (c.N < 8) throw ConfigError("N: must be >= 8");
  if (!(c.dt >= 0.0) || !std::isfinite(c.dt)) throw ConfigError("dt: must be > 0 (or 0 for the default rule)");
  if (!(c.cfl > 0.0)) throw ConfigError("cfl: must be > 0");
  if (!(c.T >= 0.0) || !std::isfinite(c.T)) throw ConfigError("T: must be > 0 (or 0 for the default horizon)");
  if (!(c.amplitude >= 0.0) || !std::isfinite(c.amplitude)) throw ConfigError("amplitude: must be >= 0");
  if (c.samples < 2) throw ConfigError("samples: must be >= 2");
  if (!(c.c_prime > 0.0 && c.c_prime < 1.0)) throw ConfigError("c_prime: must lie in (0, 1)");
  if (!(c.abort_growth >= 0.0)) throw ConfigError("abort_growth: must be >= 0");
  if (c.profile != "mode1" && c.profile != "random" && c.profile != "mean")
    throw ConfigError("profile: unknown profile '" + c.profile + "'");
}

NonlinearSolver::NonlinearSolver(const GridPtr& grid, const FlowParams& params, int K, double dt, bool nonlinear)
    : grid_(grid), params_(params), K_(K), dt_(dt), nonlinear_(nonlinear), zero_stream_(grid) {
  if (K < 0) throw ConfigError("K: must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("dt: must be > 0");
  ops_.resize(K + 1);
  steppers_.resize(K + 1);
  stream_.reserve(K);
  parallel_for(K + 1, [&](std::size_t k) {
    ops_[k] = assemble_mode_operator(grid, params, static_cast<int>(k));
    if (k > 0) steppers_[k] = ModeStepper(ops_[k].collocation, dt);
  });
  for (int k = 1; k <= K; ++k) stream_.emplace_back(grid, k);

  const int m = grid->interior_size();
  const Vec inv_r = grid->interior_nodes().cwiseInverse();
  Mat polar = -params.nu() * (grid->d2.block(1, 1, m, m) + inv_r.asDiagonal() * grid->d1.block(1, 1, m, m));
  zero_stepper_ = ModeStepper(polar.cast<Complex>(), dt);
  sqrt_r_ = sqrt_nodes(*grid);
}

std::vector<CVec> NonlinearSolver::stream_functions(const SpectralState& s) const {
  std::vector<CVec> phi(K_ + 1);
  parallel_for(K_ + 1, [&](std::size_t k) {
    if (k == 0) {
      const CVec mean = s.modes[0].cwiseQuotient(sqrt_r_.cast<Complex>());
      phi[0] = zero_stream_.solve(mean).cwiseProduct(sqrt_r_.cast<Complex>());
    } else {
      phi[k] = stream_[k - 1].solve(s.modes[k]);
    }
  });
  return phi;
}

namespace {

struct Convolution {
  int K;
  const std::vector<CVec>& w;
  std::vector<CVec> dphi;  // interior of d_r (r^{-1/2} phi_l), l >= 0
  std::vector<CVec> pphi;  // r^{-3/2} phi_l, l >= 0

  CVec w_at(int k) const { return k >= 0 ? w[k] : CVec(w[-k].conjugate()); }
  CVec dphi_at(int l) const { return l >= 0 ? dphi[l] : CVec(dphi[-l].conjugate()); }
  CVec pphi_at(int l) const { return l >= 0 ? pphi[l] : CVec(pphi[-l].conjugate()); }

  NonlinearTerms terms(int k) const {
    const Eigen::Index m = w[0].size();
    NonlinearTerms t{CVec::Zero(m), CVec::Zero(m)};
    for (int l = std::max(-K, k - K); l <= std::min(K, k + K); ++l) {
      const CVec wk = w_at(k - l);
      t.f1.array() += dphi_at(l).array() * wk.array();
      if (l != 0) t.f2.array() += Complex(0.0, l) * pphi_at(l).array() * wk.array();
    }
    return t;
  }
};

Convolution make_convolution(const RadialGrid& grid, int K, const std::vector<CVec>& w,
                             const std::vector<CVec>& phi) {
  Convolution c{K, w, {}, {}};
  const int m = grid.interior_size();
  const Vec r = grid.nodes;
  const Vec inv_sqrt_full = r.cwiseSqrt().cwiseInverse();
  const Vec rin = grid.interior_nodes();
  const Vec r_m32 = rin.array().pow(-1.5);
  c.dphi.resize(K + 1);
  c.pphi.resize(K + 1);
  for (int l = 0; l <= K; ++l) {
    const CVec scaled = grid.extend(phi[l]).cwiseProduct(inv_sqrt_full.cast<Complex>());
    c.dphi[l] = (grid.d1.cast<Complex>() * scaled).segment(1, m);
    c.pphi[l] = phi[l].cwiseProduct(r_m32.cast<Complex>());
  }
  return c;
}

CVec assemble_forcing(const RadialGrid& grid, int k, const NonlinearTerms& t) {
  const int m = grid.interior_size();
  const Vec rin = grid.interior_nodes();
  const Vec sqrt_full = grid.nodes.cwiseSqrt();
  const CVec flux = grid.extend(t.f2).cwiseProduct(sqrt_full.cast<Complex>());
  const CVec dflux = (grid.d1.cast<Complex>() * flux).segment(1, m);
  CVec n = Complex(0.0, k) * t.f1 - rin.cwiseSqrt().cast<Complex>().cwiseProduct(dflux);
  return n.cwiseQuotient(rin.cast<Complex>());
}

}  // namespace

NonlinearTerms NonlinearSolver::nonlinear_terms(const SpectralState& s, int k) const {
  if (std::abs(k) > K_ || s.K != K_) throw DomainError("nonlinear_terms: |k| must be <= K");
  const std::vector<CVec> phi = stream_functions(s);
  return make_convolution(*grid_, K_, s.modes, phi).terms(k);
}

std::vector<CVec> NonlinearSolver::nonlinear_forcing(const SpectralState& s) const {
  if (s.K != K_) throw ShapeError("nonlinear_forcing: state K differs from solver K");
  const std::vector<CVec> phi = stream_functions(s);
  const Convolution conv = make_convolution(*grid_, K_, s.modes, phi);
  std::vector<CVec> out(K_ + 1);
  parallel_for(K_ + 1, [&](std::size_t k) {
    out[k] = assemble_forcing(*grid_, static_cast<int>(k), conv.terms(static_cast<int>(k)));
  });
  out[0] = out[0].real().cast<Complex>();
  return out;
}

CVec NonlinearSolver::zero_mode_source(const SpectralState& s) const {
  const CVec n0 = nonlinear_forcing(s)[0];
  return n0.cwiseQuotient(sqrt_r_.cast<Complex>());
}

CVec NonlinearSolver::step_zero_mode(const CVec& w0, const CVec& w0_prev, const CVec& source,
                                     const CVec& source_prev, bool euler) const {
  const CVec s = sqrt_r_.cast<Complex>();
  const CVec mean = w0.cwiseQuotient(s);
  CVec next;
  if (euler) {
    next = zero_stepper_.euler(mean, -source);
  } else {
    next = zero_stepper_.bdf2(mean, w0_prev.cwiseQuotient(s), -source, -source_prev);
  }
  return next.real().cast<Complex>().cwiseProduct(s);
}

void NonlinearSolver::step(SpectralState& s) {
  if (s.K != K_) throw ShapeError("step: state K differs from solver K");
  const int m = grid_->interior_size();
  std::vector<CVec> forcing;
  if (nonlinear_) {
    forcing = nonlinear_forcing(s);
    for (auto& f : forcing) f = -f;
  } else {
    forcing.assign(K_ + 1, CVec::Zero(m));
  }
  const bool euler = !history_;
  std::vector<CVec> next(K_ + 1);
  parallel_for(K_ + 1, [&](std::size_t k) {
    if (k == 0) {
      const CVec src = -forcing[0].cwiseQuotient(sqrt_r_.cast<Complex>());
      const CVec src_prev = euler ? src : CVec(-prev_forcing_[0].cwiseQuotient(sqrt_r_.cast<Complex>()));
      next[0] = step_zero_mode(s.modes[0], euler ? s.modes[0] : prev_modes_[0], src, src_prev, euler);
    } else if (euler) {
      next[k] = steppers_[k].euler(s.modes[k], forcing[k]);
    } else {
      next[k] = steppers_[k].bdf2(s.modes[k], prev_modes_[k], forcing[k], prev_forcing_[k]);
    }
  });
  for (const CVec& v : next)
    if (!v.allFinite()) throw IntegrationFailure("non-finite state", s.time + dt_);
  prev_modes_ = std::move(s.modes);
  prev_forcing_ = std::move(forcing);
  s.modes = std::move(next);
  s.time += dt_;
  history_ = true;
}

double NonlinearSolver::dissipation(const SpectralState& s) const {
  const Vec q = grid_->interior_weights();
  double total = 0.0;
  for (int k = 0; k <= K_; ++k) {
    const CVec lw = ops_[k].collocation * s.modes[k];
    const double d = (lw.array() * s.modes[k].conjugate().array() * q.array()).sum().real();
    total += k == 0 ? d : 2.0 * d;
  }
  return total;
}

SpectralState initial_profile(const GridPtr& grid, const FlowParams& params, int K, const std::string& profile,
                              std::uint64_t seed) {
  SpectralState s = zero_state(grid, params, K);
  if (profile == "mode1") {
    if (K < 1) throw ConfigError("profile: mode1 needs K >= 1");
    s.modes[1] = psi_interior(*grid, 1);
  } else if (profile == "mean") {
    s.modes[0] = psi_interior(*grid, 1);
  } else if (profile == "random") {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k <= std::min(K, 4); ++k) {
      for (int l = 1; l <= 4; ++l) {
        const double scale = std::ldexp(1.0, -(k + l - 1));
        const double re = normal(rng);
        const double im = normal(rng);
        const Complex c = k == 0 ? Complex(re, 0.0) : Complex(re, im);
        s.modes[k] += scale * c * psi_interior(*grid, l);
      }
    }
  } else {
    throw ConfigError("profile: unknown profile '" + profile + "'");
  }
  const double norm = std::sqrt(s.enstrophy());
  if (norm > 0.0)
    for (auto& v : s.modes) v /= norm;
  return s;
}

double initial_functional(const SpectralState& s) {
  const RadialGrid& grid = *s.grid;
  const double R = grid.R;
  const Vec r = grid.interior_nodes();
  double h1 = 0.0, r2 = 0.0, rm3 = 0.0;
  for (int k = -s.K; k <= s.K; ++k) {
    const CVec w = s.mode(k);
    h1 += sq(grid.l2_norm(w)) + sq(grid.l2_norm(derivative_of_interior(grid, w)));
    r2 += sq(grid.l2_norm(CVec(w.cwiseProduct(r.array().square().matrix().cast<Complex>()))));
    rm3 += sq(grid.l2_norm(CVec(w.cwiseProduct(r.array().pow(-3).matrix().cast<Complex>()))));
  }
  return R * std::sqrt(h1) + std::sqrt(r2) / (R * R * std::pow(std::log(R), 1.5)) + std::pow(R, 3) * std::sqrt(rm3);
}

double default_time_step(const SpectralState& s, double cfl) {
  const RadialGrid& grid = *s.grid;
  const int K = std::max(s.K, 1);
  const Vec r = grid.nodes;
  const int np = grid.n_points;
  const double dtheta = 2.0 * kPi / (3.0 * K);

  Vec u_theta = Vec::Zero(np), u_r = Vec::Zero(np);
  if (s.enstrophy() > 0.0) {
    const Vec inv_sqrt = r.cwiseSqrt().cwiseInverse();
    const Vec sr = sqrt_nodes(grid);
    for (int k = 0; k <= s.K; ++k) {
      CVec phi;
      if (k == 0)
        phi = ZeroModeStreamSolver(s.grid).solve(s.modes[0].cwiseQuotient(sr.cast<Complex>())).cwiseProduct(sr.cast<Complex>());
      else
        phi = solve_stream(s.grid, k, s.modes[k]);
      const CVec plain = grid.extend(phi).cwiseProduct(inv_sqrt.cast<Complex>());
      const Vec dphi = (grid.d1.cast<Complex>() * plain).cwiseAbs();
      const double mult = k == 0 ? 1.0 : 2.0;
      u_theta += mult * dphi;
      u_r += mult * k * plain.cwiseAbs().cwiseQuotient(r);
    }
  }
  double rate_theta = 0.0, rate_r = 0.0;
  for (int j = 0; j < np; ++j) {
    rate_theta = std::max(rate_theta, (std::abs(s.params.B()) / sq(r(j)) + u_theta(j) / r(j)) / dtheta);
    double dr = std::numeric_limits<double>::infinity();
    if (j > 0) dr = std::min(dr, std::abs(r(j) - r(j - 1)));
    if (j + 1 < np) dr = std::min(dr, std::abs(r(j + 1) - r(j)));
    rate_r = std::max(rate_r, u_r(j) / dr);
  }
  const double by_decay = 0.1 / s.params.mu(K);
  const double rate = std::max(rate_theta, rate_r);
  return rate > 0.0 ? std::min(by_decay, cfl / rate) : by_decay;
}

SimulationResult simulate(const SimulationConfig& config) {
  validate(config);
  const FlowParams& p = config.params;
  const int K = config.K;
  const GridPtr grid = build_grid(config.N, p.R());

  SpectralState state = initial_profile(grid, p, K, config.profile, config.seed);
  for (auto& v : state.modes) v *= config.amplitude;

  SimulationResult res;
  res.config = config;
  const double T = config.T > 0.0 ? config.T : 10.0 / p.mu(1);
  const double dt_rule = config.dt > 0.0 ? config.dt : default_time_step(state, config.cfl);
  res.steps = std::max<long>(1, static_cast<long>(std::ceil(T / dt_rule - 1e-9)));
  res.dt = T / res.steps;
  res.mu.resize(K + 1);
  for (int k = 0; k <= K; ++k) res.mu[k] = k == 0 ? 0.0 : p.mu(k);

  NonlinearSolver solver(grid, p, K, res.dt, config.nonlinear);
  res.initial_nonzero = state.nonzero_norm();
  res.initial_mean = state.mean_norm();
  res.initial_functional = initial_functional(state);
  res.max_mean = res.initial_mean;

  const long stride = std::max<long>(1, res.steps / config.samples);
  const double R = p.R();
  std::vector<double> sup(K + 1, 0.0), int2(K + 1, 0.0), intinf(K + 1, 0.0);
  std::vector<double> prev2(K + 1, 0.0), previnf(K + 1, 0.0);
  std::vector<double> sample_t, sample_nonzero, sample_mode1;
  double prev_enstrophy = 0.0, prev_dissipation = 0.0;
  const Vec inv_sqrt_r = grid->interior_nodes().cwiseSqrt().cwiseInverse();
  ZeroModeStreamSolver zero_stream(grid);
  std::vector<StreamSolver> streams;
  for (int k = 1; k <= K; ++k) streams.emplace_back(grid, k);

  auto observe = [&](long n) {
    const double t = state.time;
    const double ens = state.enstrophy();
    const double diss = solver.dissipation(state);
    double residual = 0.0;
    if (n > 0) residual = (ens - prev_enstrophy) / res.dt + (diss + prev_dissipation);
    prev_enstrophy = ens;
    prev_dissipation = diss;

    sup[0] = std::max(sup[0], state.mean_norm());
    for (int k = 1; k <= K; ++k) {
      const double e = std::exp(config.c_prime * res.mu[k] * t);
      const double wn = grid->l2_norm(state.modes[k]);
      const CVec phi = streams[k - 1].solve(state.modes[k]);
      const double linf = phi.cwiseProduct(inv_sqrt_r.cast<Complex>()).cwiseAbs().maxCoeff();
      const double a2 = sq(e * wn), ainf = sq(e * linf);
      sup[k] = std::max(sup[k], e * wn);
      if (n > 0) {
        int2[k] += 0.5 * res.dt * (a2 + prev2[k]);
        intinf[k] += 0.5 * res.dt * (ainf + previnf[k]);
      }
      prev2[k] = a2;
      previnf[k] = ainf;
    }
    const double nz = state.nonzero_norm();
    if (res.initial_nonzero > 0.0) res.max_growth = std::max(res.max_growth, nz / res.initial_nonzero);
    res.max_mean = std::max(res.max_mean, state.mean_norm());

    if (n % stride == 0 || n == res.steps) {
      DiagnosticSample d;
      d.t = t;
      d.nonzero_norm = nz;
      d.mean_norm = state.mean_norm();
      d.enstrophy = ens;
      d.enstrophy_residual = residual;
      for (int k = 0; k <= K; ++k) {
        const auto [outer, inner] = boundary_curvature(*grid, state.modes[k]);
        d.boundary_curvature = std::max({d.boundary_curvature, outer, inner});
      }
      d.energies.resize(K + 1);
      d.energies[0] = sup[0];
      for (int k = 1; k <= K; ++k)
        d.energies[k] = sup[k] + std::sqrt(res.mu[k] * int2[k]) +
                        std::sqrt(std::abs(p.B())) * std::pow(k, 1.5) / (R * R) * std::sqrt(intinf[k]);
      res.samples.push_back(std::move(d));
      sample_t.push_back(t);
      sample_nonzero.push_back(nz);
      sample_mode1.push_back(grid->l2_norm(state.modes[1]));
    }
    return nz;
  };

  observe(0);
  for (long n = 1; n <= res.steps; ++n) {
    try {
      solver.step(state);
    } catch (const IntegrationFailure& e) {
      res.failed = true;
      res.failure_time = e.time();
      res.failure_reason = e.what();
      break;
    }
    const double nz = observe(n);
    if (config.abort_growth > 0.0 && res.initial_nonzero > 0.0 && nz > config.abort_growth * res.initial_nonzero) {
      res.aborted = true;
      res.failure_time = state.time;
      res.failure_reason = "growth above abort_growth";
      break;
    }
  }

  if (res.initial_nonzero > 0.0) res.final_ratio = state.nonzero_norm() / res.initial_nonzero;
  const double g1 = p.enhanced_rate(1);
  const double t_end = state.time;
  double lo = 2.0 / g1, hi = std::min(20.0 / g1, t_end);
  TailFit fit = fit_tail(sample_t, sample_nonzero, lo, hi);
  if (fit.used < 3) fit = fit_tail(sample_t, sample_nonzero, 0.5 * t_end, t_end);
  res.fitted_rate = fit.rate;
  res.fit_r_squared = fit.r_squared;
  TailFit fit1 = fit_tail(sample_t, sample_mode1, lo, hi);
  if (fit1.used < 3) fit1 = fit_tail(sample_t, sample_mode1, 0.5 * t_end, t_end);
  res.mode1_rate = fit1.rate;
  res.final_state = std::move(state);
  return res;
}

std::string diagnostics_csv_header(int K) {
  std::string h = "t,norm_nonzero,norm_mean,enstrophy,enstrophy_residual,boundary_curvature";
  for (int k = 0; k <= K; ++k) h += ",E_" + std::to_string(k);
  return h;
}

std::string diagnostics_csv_row(const DiagnosticSample& s) {
  std::string row = format_double(s.t) + ',' + format_double(s.nonzero_norm) + ',' + format_double(s.mean_norm) +
                    ',' + format_double(s.enstrophy) + ',' + format_double(s.enstrophy_residual) + ',' +
                    format_double(s.boundary_curvature);
  for (const double e : s.energies) row += ',' + format_double(e);
  return row;
}

}  // namespace tcflow
