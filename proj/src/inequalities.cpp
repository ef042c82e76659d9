#include "tcflow/inequalities.hpp"

#include "tcflow/operators.hpp"

#include <cmath>
#include <array>
#include <random>

namespace tcflow {

namespace {

double sq(double x) { return x * x; }

// sqrt(sum_j |f(r_j)|^2 weight(r_j) q_j) over the full grid.
template <class F>
double norm_of(const RadialGrid& grid, F&& f) {
  double s = 0.0;
  for (int j = 0; j < grid.n_points; ++j) s += f(grid.nodes(j)) * grid.quad_weights(j);
  return std::sqrt(std::max(0.0, s));
}

struct Worst {
  double ratio = 0.0;
  long index = -1;
};

template <class F>
Worst worst_over(int samples, F&& ratio_of) {
  std::vector<double> ratios(samples);
  parallel_for(samples, [&](std::size_t i) { ratios[i] = ratio_of(static_cast<std::uint64_t>(i)); });
  Worst w;
  for (int i = 0; i < samples; ++i)
    if (w.index < 0 || ratios[i] > w.ratio) {
      w.ratio = ratios[i];
      w.index = i;
    }
  return w;
}

LemmaReport make_report(const std::string& name, double R, BoundaryMode mode, int samples, const Worst& w,
                        double bound) {
  LemmaReport r;
  r.name = name;
  r.R = R;
  r.mode = to_string(mode);
  r.samples = samples;
  r.worst_ratio = w.ratio;
  r.worst_index = w.index;
  r.bound = bound;
  r.pass = w.ratio <= bound;
  return r;
}

void check_samples(int samples) {
  if (samples < 1) throw ConfigError("samples: must be >= 1");
}

CVec sample_values(const TestFunction& f, const RadialGrid& grid) {
  CVec v(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) v(j) = f.value(grid.nodes(j));
  return v;
}

}  // namespace

const char* to_string(BoundaryMode m) {
  switch (m) {
    case BoundaryMode::Free: return "free";
    case BoundaryMode::Dirichlet: return "dirichlet";
    case BoundaryMode::MeanZero: return "mean-zero";
  }
  return "free";
}

Complex TestFunction::value(double r) const {
  const double s = std::log(r) / std::log(R);
  Complex v = -shift;
  for (std::size_t j = 0; j < cos_coeff.size(); ++j) v += cos_coeff[j] * std::cos(j * kPi * s);
  for (std::size_t j = 1; j < sin_coeff.size(); ++j) v += sin_coeff[j] * std::sin(j * kPi * s);
  return v;
}

Complex TestFunction::derivative(double r) const {
  const double logr = std::log(R);
  const double s = std::log(r) / logr;
  Complex d = 0.0;
  for (std::size_t j = 1; j < cos_coeff.size(); ++j) d -= cos_coeff[j] * (j * kPi) * std::sin(j * kPi * s);
  for (std::size_t j = 1; j < sin_coeff.size(); ++j) d += sin_coeff[j] * (j * kPi) * std::cos(j * kPi * s);
  return d / (r * logr);
}

TestFunction TestFunctionSampler::sample(const RadialGrid& grid, std::uint64_t index) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  TestFunction f;
  f.R = grid.R;
  f.cos_coeff.assign(terms + 1, 0.0);
  f.sin_coeff.assign(terms + 1, 0.0);
  for (int j = 0; j <= terms; ++j) {
    const double scale = std::pow(decay, std::max(0, j - 1));
    const double a_re = normal(rng), a_im = normal(rng), b_re = normal(rng), b_im = normal(rng);
    if (mode != BoundaryMode::Dirichlet) f.cos_coeff[j] = scale * Complex(a_re, a_im);
    if (j > 0) f.sin_coeff[j] = scale * Complex(b_re, b_im);
  }
  if (mode == BoundaryMode::MeanZero) {
    Complex mean = 0.0;
    for (int j = 0; j < grid.n_points; ++j) mean += f.value(grid.nodes(j)) * grid.quad_weights(j);
    f.shift = mean / (grid.R - 1.0);
  }
  return f;
}

double sup_on_interval(const std::function<double(double)>& f, double R, int scan) {
  const double logr = std::log(R);
  const auto at = [&](double s) { return f(std::exp(s * logr)); };
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < scan; ++i) {
    const double v = at(static_cast<double>(i) / (scan - 1));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = std::max(0, best - 1) / static_cast<double>(scan - 1);
  double b = std::min(scan - 1, best + 1) / static_cast<double>(scan - 1);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = at(c), fd = at(d);
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = at(d);
    }
  }
  return std::max({best_val, fc, fd});
}

double a1_ratio(const TestFunction& f, const RadialGrid& grid, bool dirichlet) {
  const double R = grid.R;
  const double lhs = sup_on_interval([&](double r) { return std::norm(f.value(r)); }, R);
  const double a = norm_of(grid, [&](double r) { return std::norm(f.value(r)) / r; });
  const double b = norm_of(grid, [&](double r) { return r * std::norm(f.derivative(r)); });
  const double rhs = 2.0 * a * b + (dirichlet ? 0.0 : R / (R - 1.0) * a * a);
  return rhs > 0.0 ? lhs / rhs : 0.0;
}

double a2_ratio(const TestFunction& f, const RadialGrid& grid) {
  const double lhs = sup_on_interval([&](double r) { return r * std::norm(f.value(r)); }, grid.R);
  const double a = norm_of(grid, [&](double r) { return r * std::norm(f.value(r)); });
  const double b = norm_of(grid, [&](double r) { return r * std::norm(f.derivative(r)); });
  const double rhs = 4.0 * a * b;
  return rhs > 0.0 ? lhs / rhs : 0.0;
}

std::pair<double, double> a5_ratios(const TestFunction& f, const RadialGrid& grid) {
  const double w = norm_of(grid, [&](double r) { return std::norm(f.value(r)); });
  const double rw = norm_of(grid, [&](double r) { return r * r * std::norm(f.derivative(r)); });
  const double w_r = norm_of(grid, [&](double r) { return std::norm(f.value(r)) / r; });
  const double sw = norm_of(grid, [&](double r) { return r * std::norm(f.derivative(r)); });
  const double first = rw > 0.0 ? w / (2.0 * rw) : 0.0;
  const double second = sw > 0.0 ? w_r / (2.0 * std::log(grid.R) * sw) : 0.0;
  return {first, second};
}

std::vector<LemmaReport> check_sobolev_a1(int samples, const RadialGrid& grid, std::uint64_t seed) {
  check_samples(samples);
  const double bound = 1.0 + kExplicitTolerance;
  std::vector<LemmaReport> out;
  for (const BoundaryMode mode : {BoundaryMode::Free, BoundaryMode::Dirichlet}) {
    const TestFunctionSampler sampler{seed, 8, 0.6, mode};
    const bool dir = mode == BoundaryMode::Dirichlet;
    const Worst w = worst_over(samples, [&](std::uint64_t i) { return a1_ratio(sampler.sample(grid, i), grid, dir); });
    out.push_back(make_report(dir ? "A1_dirichlet" : "A1", grid.R, mode, samples, w, bound));
  }
  return out;
}

std::vector<LemmaReport> check_weighted_linf_a2(int samples, const RadialGrid& grid, std::uint64_t seed) {
  check_samples(samples);
  const TestFunctionSampler sampler{seed, 8, 0.6, BoundaryMode::Dirichlet};
  const Worst w = worst_over(samples, [&](std::uint64_t i) { return a2_ratio(sampler.sample(grid, i), grid); });
  return {make_report("A2", grid.R, BoundaryMode::Dirichlet, samples, w, 1.0 + kExplicitTolerance)};
}

std::vector<LemmaReport> check_poincare_a5(int samples, const RadialGrid& grid, std::uint64_t seed) {
  check_samples(samples);
  const TestFunctionSampler sampler{seed, 8, 0.6, BoundaryMode::Dirichlet};
  std::vector<std::pair<double, double>> ratios(samples);
  parallel_for(samples, [&](std::size_t i) { ratios[i] = a5_ratios(sampler.sample(grid, i), grid); });
  Worst first, second;
  for (int i = 0; i < samples; ++i) {
    if (first.index < 0 || ratios[i].first > first.ratio) first = {ratios[i].first, i};
    if (second.index < 0 || ratios[i].second > second.ratio) second = {ratios[i].second, i};
  }
  const double bound = 1.0 + kExplicitTolerance;
  return {make_report("A5_r", grid.R, BoundaryMode::Dirichlet, samples, first, bound),
          make_report("A5_log", grid.R, BoundaryMode::Dirichlet, samples, second, bound)};
}

std::vector<LemmaReport> check_elliptic_a4(int samples, const GridPtr& grid_ptr, std::uint64_t seed,
                                           const std::vector<int>& ks) {
  check_samples(samples);
  const RadialGrid& grid = *grid_ptr;
  const int m = grid.interior_size();
  const double R = grid.R;
  const Vec r = grid.nodes;
  const TestFunctionSampler sampler{seed, 8, 0.6, BoundaryMode::Free};
  std::vector<LemmaReport> out;
  for (const int k : ks) {
    const StreamSolver solver(grid_ptr, k);
    const double kk = std::abs(k);
    std::vector<std::array<double, 3>> ratios(samples);
    parallel_for(samples, [&](std::size_t i) {
      const CVec w = sample_values(sampler.sample(grid, i), grid);
      const CVec phi = grid.extend(solver.solve(w.segment(1, m)));
      const CVec dphi = grid.d1.cast<Complex>() * phi;
      double grad = 0.0, ang = 0.0, rw = 0.0, l1 = 0.0, sup_d = 0.0, sup_p = 0.0;
      for (int j = 0; j < grid.n_points; ++j) {
        const double q = grid.quad_weights(j);
        grad += std::norm(dphi(j)) * q;
        ang += std::norm(phi(j)) / sq(r(j)) * q;
        rw += sq(r(j)) * std::norm(w(j)) * q;
        l1 += std::sqrt(r(j)) * std::abs(w(j)) * q;
        sup_d = std::max(sup_d, std::sqrt(r(j)) * std::abs(dphi(j)));
        sup_p = std::max(sup_p, std::abs(phi(j)) / std::sqrt(r(j)));
      }
      const double energy = grad + kk * kk * ang;
      ratios[i][0] = rw > 0.0 ? energy / (rw / (kk * kk)) : 0.0;
      ratios[i][1] = l1 > 0.0 ? energy / (l1 * l1 / kk) : 0.0;
      ratios[i][2] = rw > 0.0 ? (sup_d + kk * sup_p) / (std::sqrt(R / (R - 1.0) / kk) * std::sqrt(rw)) : 0.0;
    });
    const char* names[] = {"A4_energy", "A4_l1", "A4_sup"};
    const double bounds[] = {calibrated::kA4Energy, calibrated::kA4L1, calibrated::kA4Sup};
    for (int c = 0; c < 3; ++c) {
      Worst w;
      for (int i = 0; i < samples; ++i)
        if (w.index < 0 || ratios[i][c] > w.ratio) w = {ratios[i][c], i};
      LemmaReport rep = make_report(std::string(names[c]) + "_k" + std::to_string(k), R, BoundaryMode::Free,
                                    samples, w, bounds[c]);
      out.push_back(rep);
    }
  }
  return out;
}

std::vector<LemmaReport> check_elliptic_a6(int samples, const GridPtr& grid_ptr, std::uint64_t seed) {
  check_samples(samples);
  const RadialGrid& grid = *grid_ptr;
  const int m = grid.interior_size();
  const double R = grid.R;
  const Vec r = grid.nodes;
  const ZeroModeStreamSolver solver(grid_ptr);
  const TestFunctionSampler sampler{seed, 8, 0.6, BoundaryMode::Dirichlet};
  const double scale = std::sqrt(R / (R - 1.0)) * (1.0 + std::log(R));
  const Worst w = worst_over(samples, [&](std::uint64_t i) {
    const CVec wv = sample_values(sampler.sample(grid, i), grid);
    const CVec phi = grid.extend(solver.solve(wv.segment(1, m)));
    const double sup = (grid.d1.cast<Complex>() * phi).cwiseAbs().maxCoeff();
    double n = 0.0;
    for (int j = 0; j < grid.n_points; ++j) n += std::pow(r(j), 3) * std::norm(wv(j)) * grid.quad_weights(j);
    return n > 0.0 ? sup / (scale * std::sqrt(n)) : 0.0;
  });
  return {make_report("A6", R, BoundaryMode::Dirichlet, samples, w, calibrated::kA6)};
}

}  // namespace tcflow
