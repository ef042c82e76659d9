#include "tcflow/spectral_analysis.hpp"

#include "tcflow/expm.hpp"
#include "tcflow/imex.hpp"
#include "tcflow/io.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace tcflow {

namespace {

CMat shifted(const ModeOperator& op, double lambda) {
  CMat a = op.matrix;
  a.diagonal().array() -= Complex(0.0, lambda);
  return a;
}

// Rate used to place time windows: the enhanced-dissipation scale, or the viscous
// Dirichlet scale when there is no shear.
double rate_scale(const ModeOperator& op) {
  const double g = op.params.enhanced_rate(op.k);
  if (g > 0.0) return g;
  const double logr = std::log(op.params.R());
  return op.params.nu() * ((kPi / logr) * (kPi / logr) + op.k * op.k) / (op.params.R() * op.params.R());
}

std::vector<double> geomspace(double a, double b, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out[i] = a * std::pow(b / a, s);
  }
  return out;
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0, std_error = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  if (sxx == 0.0) {
    f.intercept = my;
    f.r_squared = 0.0;
    return f;
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double ssr = std::max(0.0, syy - f.slope * sxy);
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  if (x.size() > 2) f.std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  return f;
}

}  // namespace

double sigma_min(const ModeOperator& op, double lambda) {
  Eigen::BDCSVD<CMat> svd(shifted(op, lambda));
  return svd.singularValues().minCoeff();
}

ResolventProbe resolvent_probe(const ModeOperator& op, double lambda) {
  const CMat a = shifted(op, lambda);
  Eigen::BDCSVD<CMat> svd(a, Eigen::ComputeThinV);
  const Eigen::Index last = svd.singularValues().size() - 1;
  ResolventProbe p;
  p.lambda = lambda;
  p.sigma_min = svd.singularValues()(last);
  const CVec v = svd.matrixV().col(last);
  p.residual = std::abs((a * v).norm() - p.sigma_min);
  return p;
}

std::vector<double> default_lambda_grid(const ModeOperator& op) {
  const double kb = op.k * op.params.B();
  const double R = op.params.R();
  double lo, hi;
  if (kb != 0.0) {
    const double a = kb * (1.0 / (R * R) - 0.2);
    const double b = kb * 1.2;
    lo = std::min(a, b);
    hi = std::max(a, b);
  } else {
    const double s = rate_scale(op) * R * R;
    lo = -s;
    hi = s;
  }
  const int uniform = 201;
  const double span = hi - lo;
  std::vector<double> grid;
  grid.reserve(uniform + 40);
  for (const double d : geomspace(1e-2 * span, 1e2 * span, 20)) grid.push_back(lo - d);
  for (int i = 0; i < uniform; ++i) grid.push_back(lo + span * i / (uniform - 1));
  for (const double d : geomspace(1e-2 * span, 1e2 * span, 20)) grid.push_back(hi + d);
  std::sort(grid.begin(), grid.end());
  return grid;
}

PseudospectralBound pseudospectral_bound(const ModeOperator& op, const std::vector<double>& lambda_grid,
                                         int refine_iters) {
  if (lambda_grid.size() < 3) throw ConfigError("pseudospectral_bound: lambda grid needs >= 3 points");
  const double kb = op.k * op.params.B();
  const double R = op.params.R();
  const double sym_lo = std::min(kb, kb / (R * R));
  const double sym_hi = std::max(kb, kb / (R * R));
  const auto [gmin, gmax] = std::minmax_element(lambda_grid.begin(), lambda_grid.end());
  if (*gmin > sym_lo || *gmax < sym_hi)
    throw ConfigError("pseudospectral_bound: lambda grid does not cover the range of kB/r^2");

  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end());
  PseudospectralBound out;
  out.scan.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    out.scan[i].lambda = grid[i];
    out.scan[i].sigma_min = sigma_min(op, grid[i]);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.scan.size(); ++i)
    if (out.scan[i].sigma_min < out.scan[best].sigma_min) best = i;
  out.psi = out.scan[best].sigma_min;
  out.lambda_star = out.scan[best].lambda;

  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double scale = std::max({std::abs(kb), std::abs(out.lambda_star), rate_scale(op)});
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = sigma_min(op, c);
  double fd = sigma_min(op, d);
  for (int it = 0; it < refine_iters && (b - a) > 1e-4 * scale; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = sigma_min(op, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = sigma_min(op, d);
    }
  }
  if (fc < out.psi) {
    out.psi = fc;
    out.lambda_star = c;
  }
  if (fd < out.psi) {
    out.psi = fd;
    out.lambda_star = d;
  }
  return out;
}

double semigroup_norm(const ModeOperator& op, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("semigroup_norm: t must be >= 0");
  if (t == 0.0) return 1.0;
  const CMat e = expm(-t * op.matrix);
  Eigen::BDCSVD<CMat> svd(e);
  return svd.singularValues()(0);
}

std::vector<double> default_time_grid(const ModeOperator& op, int count) {
  if (count < 2) throw ConfigError("time grid: count must be >= 2");
  const double g = rate_scale(op);
  return geomspace(0.2 / g, 50.0 / g, count);
}

DecayFit decay_rate_fit(const ModeOperator& op, const std::vector<double>& t_grid) {
  const double g = rate_scale(op);
  const double t_min = 2.0 / g;
  const double t_max = 20.0 / g;
  DecayFit fit;
  fit.params = op.params;
  fit.k = op.k;
  fit.n_points = op.grid->n_points;
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.times = t_grid;
  fit.norms.resize(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) { fit.norms[i] = semigroup_norm(op, t_grid[i]); });

  std::vector<double> x, y;
  const double slack = 1e-12 * t_max;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < t_min - slack || t_grid[i] > t_max + slack) continue;
    if (!(fit.norms[i] > 0.0)) continue;
    x.push_back(t_grid[i]);
    y.push_back(std::log(fit.norms[i]));
  }
  if (x.size() < 3) throw ConfigError("decay_rate_fit: fewer than 3 times inside the fit window");
  const LineFit lf = least_squares(x, y);
  fit.rate = -lf.slope;
  fit.prefactor = std::exp(lf.intercept);
  fit.r_squared = lf.r_squared;
  fit.accepted = lf.r_squared >= 0.99;
  return fit;
}

ExponentFit scaling_exponent(const std::vector<DecayFit>& records, SweepVariable variable) {
  if (records.size() < 4) throw ConfigError("scaling_exponent: need at least 4 records");
  const auto sweep_value = [&](const DecayFit& f) {
    return variable == SweepVariable::Nu ? f.params.nu() : std::abs(f.params.B());
  };
  const DecayFit& ref = records.front();
  for (const DecayFit& f : records) {
    if (!f.accepted) throw ConfigError("scaling_exponent: record with rejected fit");
    if (f.params.nu() * f.k * f.k > std::abs(f.params.B()))
      throw ConfigError("scaling_exponent: record outside the regime nu k^2 <= |B|");
    const bool same = f.k == ref.k && f.params.A() == ref.params.A() && f.params.R() == ref.params.R() &&
                      (variable == SweepVariable::Nu ? f.params.B() == ref.params.B()
                                                     : f.params.nu() == ref.params.nu());
    if (!same) throw ConfigError("scaling_exponent: records differ in a parameter other than the sweep variable");
  }

  std::vector<double> x, y;
  for (const DecayFit& f : records) {
    x.push_back(std::log(sweep_value(f)));
    y.push_back(std::log(f.rate));
  }
  ExponentFit out;
  out.count = records.size();
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  if (*xmax - *xmin == 0.0) {
    out.degenerate = true;
    out.intercept = y.front();
    return out;
  }
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const double step = (sorted.back() - sorted.front()) / (sorted.size() - 1);
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (std::abs(sorted[i] - sorted[i - 1] - step) > 1e-6 * std::abs(step) + 1e-12)
      throw ConfigError("scaling_exponent: sweep variable is not geometrically spaced");

  const LineFit lf = least_squares(x, y);
  out.slope = lf.slope;
  out.intercept = lf.intercept;
  out.r_squared = lf.r_squared;
  out.std_error = lf.std_error;
  return out;
}

ForcedResponse forced_response(const ModeOperator& op, const ForcedProblem& problem,
                               const std::vector<double>& t_grid) {
  const RadialGrid& grid = *op.grid;
  const int m = grid.interior_size();
  const int np = grid.n_points;
  const double kb = op.k * op.params.B();
  if (kb == 0.0) throw DomainError("forced_response: requires k B != 0");
  if (problem.initial.size() != 0) {
    if (problem.initial.size() != m) throw ShapeError("forced_response: initial data length mismatch");
    if (problem.initial.cwiseAbs().maxCoeff() != 0.0)
      throw ConfigError("forced_response: initial data must be zero");
  }
  if (t_grid.size() < 2) throw ConfigError("forced_response: t_grid needs >= 2 points");
  const double dt = t_grid[1] - t_grid[0];
  if (!(dt > 0.0)) throw ConfigError("forced_response: t_grid must be increasing");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (std::abs(t_grid[i] - t_grid[i - 1] - dt) > 1e-9 * dt)
      throw ConfigError("forced_response: t_grid must be uniform");
  if (problem.h2 && problem.g.size() != np) throw ShapeError("forced_response: g must be full-grid");

  ForcedResponse out;
  out.weight_rate = problem.weight_rate >= 0.0 ? problem.weight_rate
                                               : 0.5 * decay_rate_fit(op, default_time_grid(op)).rate;
  const Vec r_full = grid.nodes;
  const Vec r_in = grid.interior_nodes();
  Vec g_abs, gprime_abs;
  if (problem.h2) {
    g_abs = problem.g.cwiseAbs();
    gprime_abs = (grid.d1 * problem.g).cwiseAbs();
  }

  const auto sample = [&](double t, CVec& forcing, double& rh1, double& gh2) {
    forcing = CVec::Zero(m);
    rh1 = 0.0;
    gh2 = 0.0;
    if (problem.h1) {
      const CVec h1 = problem.h1(t);
      if (h1.size() != np) throw ShapeError("forced_response: h1 must be full-grid");
      forcing += h1.segment(1, m);
      rh1 = std::pow(grid.l2_norm(CVec(r_full.cast<Complex>().cwiseProduct(h1))), 2);
    }
    if (problem.h2) {
      const CVec h2 = problem.h2(t);
      if (h2.size() != np) throw ShapeError("forced_response: h2 must be full-grid");
      const CVec dh2 = grid.d1.cast<Complex>() * h2;
      forcing -= problem.g.segment(1, m).cast<Complex>().cwiseProduct(dh2.segment(1, m));
      const Vec mult = g_abs + r_full.cwiseProduct(gprime_abs);
      gh2 = std::pow(grid.l2_norm(CVec(mult.cast<Complex>().cwiseProduct(h2))), 2);
    }
  };

  const ModeStepper stepper(op.collocation, dt);
  CVec w = CVec::Zero(m), w_prev = CVec::Zero(m), forcing;
  const std::size_t nt = t_grid.size();
  std::vector<double> e_w(nt), e_dw(nt), e_wr(nt), e_h1(nt), e_h2(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    double rh1, gh2;
    sample(t_grid[i], forcing, rh1, gh2);
    if (i > 0) {
      CVec next = stepper.bdf2(w, w_prev, forcing, forcing);
      if (!next.allFinite()) throw IntegrationFailure("forced_response: non-finite state", t_grid[i]);
      w_prev = std::move(w);
      w = std::move(next);
    }
    const double weight = std::exp(2.0 * out.weight_rate * (t_grid[i] - t_grid[0]));
    const double wn = grid.l2_norm(w);
    out.times.push_back(t_grid[i]);
    out.norms.push_back(wn);
    e_w[i] = weight * wn * wn;
    e_dw[i] = weight * std::pow(grid.l2_norm(derivative_of_interior(grid, w)), 2);
    e_wr[i] = weight * std::pow(grid.l2_norm(CVec(w.cwiseQuotient(r_in.cast<Complex>()))), 2);
    e_h1[i] = weight * rh1;
    e_h2[i] = weight * gh2;
    out.linf_w = std::max(out.linf_w, e_w[i]);
  }
  const auto trapezoid = [&](const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 1; i < nt; ++i) s += 0.5 * (f[i] + f[i - 1]) * (t_grid[i] - t_grid[i - 1]);
    return s;
  };
  out.l2_w = trapezoid(e_w);
  out.l2_dw = trapezoid(e_dw);
  out.l2_w_over_r = trapezoid(e_wr);
  out.l2_r_h1 = trapezoid(e_h1);
  out.l2_g_h2 = trapezoid(e_h2);

  const double nu = op.params.nu();
  const double akb = std::abs(kb);
  const double k2 = static_cast<double>(op.k) * op.k;
  out.lhs = out.linf_w + std::cbrt(nu) * std::pow(akb, 2.0 / 3.0) * out.l2_w_over_r + nu * out.l2_dw +
            nu * k2 * out.l2_w_over_r;
  out.rhs = out.l2_r_h1 / (std::cbrt(nu) * std::pow(akb, 2.0 / 3.0)) + out.l2_g_h2 / nu;
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

std::string scan_csv_header() { return "nu,A,B,R,k,variable,value,n,r_squared"; }

std::string scan_csv_row(const ScanRecord& rec) {
  return format_double(rec.params.nu()) + ',' + format_double(rec.params.A()) + ',' +
         format_double(rec.params.B()) + ',' + format_double(rec.params.R()) + ',' + std::to_string(rec.k) +
         ',' + format_double(rec.variable) + ',' + format_double(rec.value) + ',' +
         std::to_string(rec.n_points) + ',' + format_double(rec.r_squared);
}

}  // namespace tcflow
