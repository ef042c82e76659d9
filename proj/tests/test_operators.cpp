#include "support.hpp"
#include "tcflow/eigenbasis.hpp"
#include "tcflow/operators.hpp"

#include <doctest.h>

using namespace tcflow;
using testing::rel_err;

namespace {

Complex form(const ModeOperator& op, const CVec& v) {
  const Vec one = Vec::Ones(v.size());
  return weighted_inner(*op.grid, apply_mode_operator(op, v), v, one);
}

double coercive_part(const ModeOperator& op, const CVec& v) {
  const RadialGrid& g = *op.grid;
  const double kk = static_cast<double>(op.k) * op.k - 0.25;
  const CVec dv = derivative_of_interior(g, v);
  const Vec inv_r2 = g.interior_nodes().array().square().inverse();
  const double over_r = weighted_inner(g, v, v, inv_r2).real();
  return op.params.nu() * (std::pow(g.l2_norm(dv), 2) + kk * over_r);
}

}  // namespace

TEST_CASE("FlowParams validation and scales") {
  CHECK_THROWS_AS(FlowParams(0.0, 0.0, 1.0, 2.0), ConfigError);
  CHECK_THROWS_AS(FlowParams(1e-3, 0.0, 0.0, 2.0), ConfigError);
  CHECK_THROWS_AS(FlowParams(1e-3, 0.0, 1.0, 1.0), ConfigError);
  const FlowParams p(1e-3, 0.5, 8.0, 2.0);
  CHECK(p.omega() == 1.0);
  CHECK(p.enhanced_rate(1) == doctest::Approx(0.1 * 4.0 / 4.0));
  CHECK(p.mu(1) == doctest::Approx(0.1));
  CHECK(p.low_frequency(10));
  CHECK_FALSE(p.low_frequency(100));
  CHECK(p.regime_ratio() == doctest::Approx(std::log(2.0) / (10.0 * 2.0)));
  CHECK(FlowParams::shear_free(1e-3, 0.0, 2.0).B() == 0.0);
  CHECK_THROWS_AS(FlowParams::shear_free(-1.0, 0.0, 2.0), ConfigError);
}

TEST_CASE("shear-free operator is real symmetric positive definite") {
  const GridPtr g = build_grid(48, 2.0);
  const ModeOperator op = assemble_mode_operator(g, FlowParams::shear_free(1e-2, 0.0, 2.0), 1);
  CHECK(op.matrix.imag().norm() == 0.0);
  const Mat m = op.matrix.real();
  CHECK((m - m.transpose()).norm() <= 1e-13 * m.norm());
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("anti-Hermitian part is i k B / r^2") {
  const GridPtr g = build_grid(64, 2.0);
  const ModeOperator op = assemble_mode_operator(g, FlowParams(1e-3, 0.0, 1.0, 2.0), 1);
  const CMat skew = (op.matrix - op.matrix.adjoint()) / 2.0;
  const Vec inv_r2 = g->interior_nodes().array().square().inverse();
  CMat expected = CMat::Zero(op.size(), op.size());
  expected.diagonal() = Complex(0.0, 1.0) * inv_r2.cast<Complex>();
  CHECK((skew - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("conjugation symmetry") {
  const GridPtr g = build_grid(40, 2.0);
  const ModeOperator a = assemble_mode_operator(g, FlowParams(1e-3, 0.0, 3.0, 2.0), 2);
  const ModeOperator b = assemble_mode_operator(g, FlowParams(1e-3, 0.0, -3.0, 2.0), 2);
  const ModeOperator c = assemble_mode_operator(g, FlowParams(1e-3, 0.0, 3.0, 2.0), -2);
  CHECK((a.matrix - b.matrix.conjugate()).norm() == 0.0);
  CHECK((a.matrix - c.matrix.conjugate()).norm() == 0.0);
}

TEST_CASE("A does not enter the operator") {
  const GridPtr g = build_grid(32, 2.0);
  const FlowParams p(1e-3, 0.0, 1.0, 2.0);
  CHECK(assemble_mode_operator(g, p, 1).matrix == assemble_mode_operator(g, p.with_A(7.0), 1).matrix);
}

TEST_CASE("grid and params must agree on R") {
  CHECK_THROWS_AS(assemble_mode_operator(build_grid(16, 3.0), FlowParams(1e-3, 0.0, 1.0, 2.0), 1), ConfigError);
}

TEST_CASE("stream solve reproduces basis functions") {
  const GridPtr g = build_grid(128, 2.0);
  const WeightedBasis b = build_basis(g, 8);
  const Vec inv_r2 = g->interior_nodes().array().square().inverse();
  for (int k : {1, 2, 3})
    for (int l : {1, 2, 5}) {
      const CVec psi = b.psi_interior(l);
      const CVec w = -b.lambda(k, l) * inv_r2.cast<Complex>().cwiseProduct(psi);
      CHECK(rel_err(solve_stream(g, k, w), psi) < 1e-8);
    }
}

TEST_CASE("stream solve of zero and inverse property") {
  const GridPtr g = build_grid(96, 2.0);
  CHECK(solve_stream(g, 1, CVec::Zero(g->interior_size())).norm() == 0.0);
  CHECK_THROWS_AS(solve_stream(g, 0, CVec::Zero(g->interior_size())), DomainError);
  std::mt19937_64 rng(17);
  for (int k : {1, 2, 5, 16}) {
    const StreamSolver s(g, k);
    for (int trial = 0; trial < 5; ++trial) {
      const CVec w = testing::random_cvec(rng, g->interior_size());
      CHECK(rel_err(s.apply(s.solve(w)), w) < 1e-10);
    }
  }
  const ZeroModeStreamSolver z(g);
  const CVec w = testing::random_cvec(rng, g->interior_size());
  CHECK(rel_err(z.apply(z.solve(w)), w) < 1e-10);
}

TEST_CASE("apply_mode_operator: zero, linearity, shape") {
  const GridPtr g = build_grid(48, 2.0);
  const ModeOperator op = assemble_mode_operator(g, FlowParams(1e-3, 0.0, 1.0, 2.0), 3);
  CHECK(apply_mode_operator(op, CVec::Zero(op.size())).norm() == 0.0);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const CVec v = testing::random_cvec(rng, op.size()), w = testing::random_cvec(rng, op.size());
    const Complex a(0.3, -1.2), b(2.0, 0.5);
    const CVec lhs = apply_mode_operator(op, a * v + b * w);
    const CVec rhs = a * apply_mode_operator(op, v) + b * apply_mode_operator(op, w);
    CHECK(rel_err(lhs, rhs) < 1e-13);
  }
  CHECK_THROWS_AS(apply_mode_operator(op, CVec::Zero(3)), ShapeError);
}

TEST_CASE("nodal and orthonormal forms agree") {
  const GridPtr g = build_grid(48, 2.0);
  const ModeOperator op = assemble_mode_operator(g, FlowParams(1e-3, 0.0, 1.0, 2.0), 2);
  std::mt19937_64 rng(8);
  const CVec v = testing::smooth_interior(rng, *g);
  CHECK(rel_err(op.to_nodal(op.matrix * op.to_orthonormal(v)), apply_mode_operator(op, v)) < 1e-10);
}

TEST_CASE("real part of the form is the coercive energy") {
  const GridPtr g = build_grid(128, 2.0);
  std::mt19937_64 rng(21);
  for (int k : {1, 2, 4}) {
    const ModeOperator op = assemble_mode_operator(g, FlowParams(1e-3, 0.0, 1.0, 2.0), k);
    for (int trial = 0; trial < 5; ++trial) {
      const CVec v = testing::smooth_interior(rng, *g);
      const double expect = coercive_part(op, v);
      CHECK(std::abs(form(op, v).real() - expect) / expect < 1e-8);
    }
  }
}

TEST_CASE("imaginary part of the form is k B <v / r^2, v>") {
  const GridPtr g = build_grid(96, 3.0);
  std::mt19937_64 rng(4);
  const ModeOperator op = assemble_mode_operator(g, FlowParams(1e-4, 0.0, 2.5, 3.0), 2);
  const Vec inv_r2 = g->interior_nodes().array().square().inverse();
  for (int trial = 0; trial < 5; ++trial) {
    const CVec v = testing::smooth_interior(rng, *g);
    const double expect = 2 * 2.5 * weighted_inner(*g, v, v, inv_r2).real();
    CHECK(std::abs(form(op, v).imag() - expect) / expect < 1e-8);
  }
}

TEST_CASE("accretivity on random vectors") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> kd(-8, 8);
  std::uniform_real_distribution<double> Bd(-10.0, 10.0), Rd(1.2, 4.0), lnu(-6.0, -2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double R = Rd(rng);
    int k = kd(rng);
    if (k == 0) k = 1;
    const GridPtr g = build_grid(48, R);
    const ModeOperator op = assemble_mode_operator(g, FlowParams(std::pow(10.0, lnu(rng)), 0.0, Bd(rng), R), k);
    const CVec v = testing::random_cvec(rng, op.size());
    CHECK(v.dot(op.matrix * v).real() >= 0.0);  // dot conjugates its first argument
  }
}

TEST_CASE("form gap at high resolution") {
  std::mt19937_64 rng(6);
  const FlowParams p(1e-2, 0.0, 1.0, 2.0);
  const GridPtr g = build_grid(128, 2.0);
  const ModeOperator op = assemble_mode_operator(g, p, 1);
  const CVec v = testing::smooth_interior(rng, *g, 6);
  const double expect = coercive_part(op, v);
  CHECK(std::abs(form(op, v).real() - expect) / expect <= 1e-6);
}

TEST_CASE("boundary curvature of a quadratic bump") {
  const GridPtr g = build_grid(32, 2.0);
  const Vec r = g->interior_nodes();
  CVec w(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) w(j) = (r(j) - 1.0) * (2.0 - r(j));
  const auto [at_R, at_1] = boundary_curvature(*g, w);
  CHECK(at_R == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(at_1 == doctest::Approx(2.0).epsilon(1e-10));
}
