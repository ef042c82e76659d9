#include "support.hpp"
#include "tcflow/eigenbasis.hpp"
#include "tcflow/regression.hpp"

#include <doctest.h>

using namespace tcflow;

namespace {

// Random smooth profile vanishing to second order at both walls.
CVec flat_bump(std::mt19937_64& rng, const RadialGrid& g) {
  CVec v = testing::smooth_interior(rng, g, 3);
  const Vec r = g.interior_nodes();
  for (Eigen::Index j = 0; j < r.size(); ++j) v(j) *= (r(j) - 1.0) * (g.R - r(j));
  return v;
}

Complex plain(const RadialGrid& g, const CVec& a, const CVec& b) {
  return weighted_inner(g, a, b, Vec::Ones(a.size()));
}

}  // namespace

TEST_CASE("basis values and validation") {
  const GridPtr g = build_grid(64, 3.0);
  const WeightedBasis b = build_basis(g, 16);
  for (int l = 1; l <= 16; ++l) {
    CHECK(b.psi(l)(0) == 0.0);
    CHECK(b.psi(l)(g->n_points - 1) == 0.0);
  }
  CHECK(b.alpha == doctest::Approx(std::sqrt(2.0 / std::log(3.0))));
  CHECK(b.lambda(2, 3) == doctest::Approx(std::pow(3.0 * kPi / std::log(3.0), 2) + 4.0));
  // closed form at the node nearest sqrt(R)
  const double rm = std::sqrt(3.0);
  Eigen::Index j;
  (g->nodes.array() - rm).abs().minCoeff(&j);
  const double r = g->nodes(j);
  CHECK(b.psi(1)(j).real() == doctest::Approx(b.alpha * std::sqrt(r) * std::sin(kPi * std::log(r) / std::log(3.0))));
  CHECK(b.alpha * std::sqrt(3.0) >= b.values.col(0).maxCoeff());
  CHECK(b.values.col(0).minCoeff() >= 0.0);
  CHECK_THROWS_AS(build_basis(g, 17), ConfigError);
  CHECK_THROWS_AS(build_basis(g, 0), ConfigError);
  CHECK_THROWS_AS(b.psi(17), DomainError);
}

TEST_CASE("Gram matrix is the identity, checked against a finer grid") {
  for (int n : {128, 512}) {
    const GridPtr g = build_grid(n, 2.0);
    const WeightedBasis b = build_basis(g, 16);
    const Vec w = g->nodes.array().square().inverse();
    double dev = 0.0;
    for (int l = 1; l <= 16; ++l)
      for (int m = 1; m <= 16; ++m)
        dev = std::max(dev, std::abs(weighted_inner(*g, b.psi(l), b.psi(m), w) - (l == m ? 1.0 : 0.0)));
    CHECK(dev <= 1e-10);
  }
}

TEST_CASE("eigen relation residual") {
  const GridPtr g = build_grid(128, 2.0);
  const WeightedBasis b = build_basis(g, 20);
  const int m = g->interior_size();
  const Vec inv_r2 = g->interior_nodes().array().square().inverse();
  for (int l = 1; l <= 20; ++l) {
    const CVec psi = b.psi(l);
    CVec res = (g->d2.cast<Complex>() * psi).segment(1, m);
    res += ((b.lambda(1, l) - 0.75) * inv_r2).cast<Complex>().cwiseProduct(psi.segment(1, m));
    CHECK(g->l2_norm(res) <= 1e-8 * g->l2_norm(psi));
  }
}

TEST_CASE("weighted Parseval for smooth boundary-vanishing functions") {
  const GridPtr g = build_grid(128, 2.0);
  const WeightedBasis b = build_basis(g, 32);
  const Vec w = g->interior_nodes().array().square().inverse();
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const CVec f = flat_bump(rng, *g);
    double sum = 0.0;
    for (int l = 1; l <= 32; ++l) sum += std::norm(weighted_inner(*g, f, b.psi_interior(l), w));
    const double norm2 = weighted_inner(*g, f, f, w).real();
    CHECK(std::abs(sum - norm2) <= 1e-6 * norm2);
  }
}

TEST_CASE("damping sum: closed form at t = 0, zero data, monotone in l_max") {
  const GridPtr g = build_grid(96, 2.0);
  const WeightedBasis b = build_basis(g, 24);
  const Vec inv_r2 = g->interior_nodes().array().square().inverse();
  for (int k : {1, 3}) {
    const CVec w0 = -b.lambda(k, 1) * inv_r2.cast<Complex>().cwiseProduct(b.psi_interior(1));
    CHECK(damping_sum(w0, k, 1.0, 0.0, b).value == doctest::Approx(b.lambda(k, 1)).epsilon(1e-10));
  }
  CHECK(damping_sum(CVec::Zero(g->interior_size()), 1, 1.0, 3.0, b).value == 0.0);

  std::mt19937_64 rng(8);
  const CVec w0 = testing::smooth_interior(rng, *g);
  double prev = 0.0;
  for (int l = 1; l <= 24; ++l) {
    const double v = damping_sum(w0, 2, 1.5, 4.0, build_basis(g, l)).value;
    CHECK(v >= prev);
    prev = v;
  }
  CVec full = g->extend(w0);
  CHECK_FALSE(damping_sum(full, 1, 1.0, 0.0, b).boundary_warning);
  full(0) = 1.0;
  CHECK(damping_sum(full, 1, 1.0, 0.0, b).boundary_warning);
}

TEST_CASE("damping sum equals the stream-function pairing at every t") {
  // The collocation oracle converges like N^-7 for this profile class; 192 puts it near 1e-10.
  const GridPtr g = build_grid(192, 2.0);
  const WeightedBasis b = build_basis(g, 48);
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> kd(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = kd(rng);
    const double B = 0.5 + 2.0 * u(rng);
    const double t = 10.0 * u(rng) / (k * B);
    const CVec w0 = flat_bump(rng, *g);
    const CVec wt = phase_mixed(*g, w0, k, B, t);
    const double oracle = -plain(*g, wt, solve_stream(g, k, wt)).real();
    CHECK(std::abs(damping_sum(w0, k, B, t, b).value - oracle) <= 1e-8 * oracle);
  }
}

TEST_CASE("integrated damping: zero data, validation") {
  const GridPtr g = build_grid(64, 2.0);
  const FlowParams p(1e-4, 0.0, 1.0, 2.0);
  const DampingRecord z = integrated_damping(g, CVec::Zero(g->interior_size()), 1, p, 20.0);
  CHECK(z.ratio == 0.0);
  CHECK(z.integral == 0.0);
  CHECK_THROWS_AS(integrated_damping(g, CVec::Ones(g->interior_size()), 1, p, 5.0), ConfigError);
  CHECK_THROWS_AS(integrated_damping(g, CVec::Ones(g->interior_size()), 1, p, 20.0, 100), ConfigError);
  CHECK_THROWS_AS(integrated_damping(g, CVec::Ones(g->interior_size()), 0, p, 20.0), DomainError);
}

TEST_CASE("integrated damping: bound, convergence in T, B rescaling") {
  const GridPtr g = build_grid(192, 2.0);
  const Vec r = g->interior_nodes();
  CVec w0(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) w0(j) = std::pow((r(j) - 1.0) * (2.0 - r(j)), 2);
  const FlowParams p(1e-4, 0.0, 1.0, 2.0);
  const DampingRecord a = integrated_damping(g, w0, 1, p, 100.0, 400);
  const DampingRecord a2 = integrated_damping(g, w0, 1, p, 200.0, 400);
  CHECK(a.ratio > 0.0);
  CHECK(a.ratio <= regression::kIntegratedDamping);
  CHECK(std::abs(a2.ratio - a.ratio) < 0.02 * a.ratio);
  for (double B : {2.0, 4.0}) {
    const DampingRecord rb = integrated_damping(g, w0, 1, p.with_B(B), 100.0, 400);
    CHECK(rb.resolved);
    CHECK(std::abs(rb.integral * B / a.integral - 1.0) < 0.05);
  }
  double prev = 0.0;
  for (double v : a.running) {
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("integrated damping flags aliased horizons") {
  const GridPtr g = build_grid(96, 2.0);
  const Vec r = g->interior_nodes();
  CVec w0(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) w0(j) = std::pow((r(j) - 1.0) * (2.0 - r(j)), 2);
  const FlowParams p(1e-4, 0.0, 1.0, 2.0);
  const DampingRecord ok = integrated_damping(g, w0, 1, p, 200.0, 400);
  const DampingRecord bad = integrated_damping(g, w0, 1, p, 800.0, 400);
  CHECK(ok.resolved);
  CHECK_FALSE(bad.resolved);
  CHECK(bad.oscillations == doctest::Approx(800.0 * 0.75 / (2.0 * kPi)));
  // Past the horizon the integrand stops decaying.
  CHECK(bad.grad_phi.back() > 10.0 * ok.grad_phi.back());
}

TEST_CASE("viscous damping: zero data, psi_1 bound, nu independence") {
  const GridPtr g = build_grid(64, 2.0);
  const WeightedBasis b = build_basis(g, 1);
  const FlowParams p(1e-4, 0.0, 1.0, 2.0);
  CHECK(viscous_damping_check(g, CVec::Zero(g->interior_size()), 1, p, 50.0).ratio == 0.0);
  const ViscousDampingRecord v4 = viscous_damping_check(g, b.psi_interior(1), 1, p, 10.0 / p.enhanced_rate(1));
  const FlowParams p5 = p.with_nu(1e-5);
  const ViscousDampingRecord v5 = viscous_damping_check(g, b.psi_interior(1), 1, p5, 10.0 / p5.enhanced_rate(1));
  CHECK(v4.ratio > 0.0);
  CHECK(v4.ratio <= regression::kViscousDamping);
  CHECK(std::max(v4.ratio, v5.ratio) / std::min(v4.ratio, v5.ratio) < 2.0);
}
