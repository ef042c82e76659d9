#pragma once

#include "tcflow/common.hpp"

#include <memory>

namespace tcflow {

/// Collocation grid on the radial interval [1, R].
///
/// Nodes are the Legendre-Gauss-Lobatto points mapped affinely from [-1, 1]. They are
/// stored in descending order: nodes(0) == R and nodes(n_points - 1) == 1, both exact.
/// Interior nodes are indices 1 .. n_points - 2; Dirichlet data lives at the two ends.
///
/// The quadrature is exact for polynomials of degree 2N - 1, which makes
/// W * d2 symmetric on interior rows and columns (W = diag(quad_weights)).
struct RadialGrid {
  int n_points = 0;  // N + 1
  double R = 0.0;
  Vec nodes;
  Mat d1;
  Mat d2;
  Vec quad_weights;

  int degree() const { return n_points - 1; }
  int interior_size() const { return n_points - 2; }
  auto interior_nodes() const { return nodes.segment(1, n_points - 2); }
  auto interior_weights() const { return quad_weights.segment(1, n_points - 2); }

  /// Pads an interior vector with the homogeneous Dirichlet values.
  CVec extend(const CVec& interior) const;
  Vec extend(const Vec& interior) const;
  CVec restrict_interior(const CVec& full) const;

  double integrate(const Vec& f) const;
  /// sqrt(sum_j |f_j|^2 q_j) for a full-grid or interior vector.
  double l2_norm(const CVec& f) const;
  double l2_norm(const Vec& f) const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Builds the grid of polynomial degree n on [1, R]. Requires n >= 8 and R > 1.
GridPtr build_grid(int n, double R);

/// Legendre-Gauss-Lobatto nodes (descending, x_0 = 1) and weights on [-1, 1].
void lgl_nodes_weights(int n, Vec& x, Vec& w);

/// Returns sum_j f_j conj(g_j) weight_j q_j. Vectors may be full-grid (n_points) or
/// interior (n_points - 2); f, g and weight must agree in length.
Complex weighted_inner(const RadialGrid& grid, const CVec& f, const CVec& g, const Vec& weight);

/// Derivative of an interior vector that vanishes at both ends, returned on the full grid.
CVec derivative_of_interior(const RadialGrid& grid, const CVec& interior);

}  // namespace tcflow
