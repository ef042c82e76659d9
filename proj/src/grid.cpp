#include "tcflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tcflow {

namespace {

// Barycentric weights 1 / prod_{k != j} (x_j - x_k), normalised by the largest magnitude.
// Products are accumulated in log space so large n does not underflow.
Vec barycentric_weights(const Vec& x) {
  const Eigen::Index n = x.size();
  Vec logmag(n);
  std::vector<int> sign(n, 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == j) continue;
      const double d = x(j) - x(k);
      acc += std::log(std::abs(d));
      if (d < 0) sign[j] = -sign[j];
    }
    logmag(j) = -acc;
  }
  const double top = logmag.maxCoeff();
  Vec lam(n);
  for (Eigen::Index j = 0; j < n; ++j) lam(j) = sign[j] * std::exp(logmag(j) - top);
  return lam;
}

}  // namespace

void lgl_nodes_weights(int n, Vec& x, Vec& w) {
  const int np = n + 1;
  x.resize(np);
  for (int j = 0; j < np; ++j) x(j) = std::cos(kPi * j / n);
  for (int iter = 0; iter < 100; ++iter) {
    double change = 0.0;
    for (int j = 0; j < np; ++j) {
      const double xj = x(j);
      double p0 = 1.0, p1 = xj;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * xj * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // Newton step on (1 - x^2) P_N'(x), written through P_N and P_{N-1}.
      const double step = (xj * p1 - p0) / ((n + 1.0) * p1);
      x(j) = xj - step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-16) break;
  }
  x(0) = 1.0;
  x(n) = -1.0;
  w.resize(np);
  for (int j = 0; j < np; ++j) {
    double p0 = 1.0, p1 = x(j);
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x(j) * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    w(j) = 2.0 / (n * (n + 1.0) * p1 * p1);
  }
}

GridPtr build_grid(int n, double R) {
  if (n < 8) throw ConfigError("grid: n must be >= 8, got " + std::to_string(n));
  if (!(R > 1.0) || !std::isfinite(R)) throw ConfigError("grid: R must be > 1");

  auto grid = std::make_shared<RadialGrid>();
  grid->n_points = n + 1;
  grid->R = R;

  Vec x, w;
  lgl_nodes_weights(n, x, w);
  const double half = 0.5 * (R - 1.0);
  grid->nodes = (x.array() + 1.0) * half + 1.0;
  grid->nodes(0) = R;
  grid->nodes(n) = 1.0;
  grid->quad_weights = w * half;

  // First and second derivative matrices from the barycentric formulas; diagonals by the
  // negative-sum rule so constants are differentiated to zero.
  const Vec lam = barycentric_weights(x);
  const int np = n + 1;
  Mat d1 = Mat::Zero(np, np);
  Mat d2 = Mat::Zero(np, np);
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) {
      if (i == j) continue;
      d1(i, j) = (lam(j) / lam(i)) / (x(i) - x(j));
    }
    d1(i, i) = -d1.row(i).sum();
  }
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) {
      if (i == j) continue;
      d2(i, j) = 2.0 * d1(i, j) * (d1(i, i) - 1.0 / (x(i) - x(j)));
    }
    d2(i, i) = -d2.row(i).sum();
  }
  const double scale = 1.0 / half;
  grid->d1 = d1 * scale;
  grid->d2 = d2 * (scale * scale);
  return grid;
}

CVec RadialGrid::extend(const CVec& interior) const {
  if (interior.size() != interior_size()) throw ShapeError("extend: expected interior vector");
  CVec full = CVec::Zero(n_points);
  full.segment(1, interior_size()) = interior;
  return full;
}

Vec RadialGrid::extend(const Vec& interior) const {
  if (interior.size() != interior_size()) throw ShapeError("extend: expected interior vector");
  Vec full = Vec::Zero(n_points);
  full.segment(1, interior_size()) = interior;
  return full;
}

CVec RadialGrid::restrict_interior(const CVec& full) const {
  if (full.size() != n_points) throw ShapeError("restrict_interior: expected full-grid vector");
  return full.segment(1, interior_size());
}

double RadialGrid::integrate(const Vec& f) const {
  if (f.size() == n_points) return quad_weights.dot(f);
  if (f.size() == interior_size()) return interior_weights().dot(f);
  throw ShapeError("integrate: vector does not conform to grid");
}

double RadialGrid::l2_norm(const CVec& f) const { return std::sqrt(integrate(f.cwiseAbs2())); }

double RadialGrid::l2_norm(const Vec& f) const { return std::sqrt(integrate(f.cwiseAbs2())); }

Complex weighted_inner(const RadialGrid& grid, const CVec& f, const CVec& g, const Vec& weight) {
  if (f.size() != g.size() || f.size() != weight.size())
    throw ShapeError("weighted_inner: vectors differ in length");
  Vec q;
  if (f.size() == grid.n_points)
    q = grid.quad_weights;
  else if (f.size() == grid.interior_size())
    q = grid.interior_weights();
  else
    throw ShapeError("weighted_inner: vectors do not conform to grid");
  Complex acc{0.0, 0.0};
  for (Eigen::Index j = 0; j < f.size(); ++j) acc += f(j) * std::conj(g(j)) * (weight(j) * q(j));
  return acc;
}

CVec derivative_of_interior(const RadialGrid& grid, const CVec& interior) {
  return grid.d1.cast<Complex>() * grid.extend(interior);
}

}  // namespace tcflow
