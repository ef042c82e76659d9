#pragma once

#include "tcflow/grid.hpp"

#include <random>

namespace tcflow::testing {

inline CVec random_cvec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  CVec v(n);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v;
}

/// Smooth interior samples: random low-order polynomial times (r - 1)(R - r).
inline CVec smooth_interior(std::mt19937_64& rng, const RadialGrid& grid, int order = 4) {
  std::normal_distribution<double> g;
  std::vector<Complex> c(order + 1);
  for (auto& x : c) x = Complex(g(rng), g(rng));
  const Vec r = grid.interior_nodes();
  CVec v(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    Complex p = 0.0;
    for (int m = order; m >= 0; --m) p = p * (r(j) - 1.0) + c[m];
    v(j) = p * (r(j) - 1.0) * (grid.R - r(j));
  }
  return v;
}

inline double rel_err(const CVec& a, const CVec& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace tcflow::testing
