#include "tcflow/inequalities.hpp"

#include <doctest.h>

using namespace tcflow;

namespace {

TestFunction constant(double R, Complex c) {
  TestFunction f;
  f.R = R;
  f.cos_coeff = {c};
  f.sin_coeff = {0.0};
  return f;
}

TestFunction scaled(TestFunction f, double a) {
  for (auto& c : f.cos_coeff) c *= a;
  for (auto& c : f.sin_coeff) c *= a;
  f.shift *= a;
  return f;
}

}  // namespace

TEST_CASE("test function derivative matches a finite difference") {
  const GridPtr g = build_grid(32, 3.0);
  const TestFunction f = TestFunctionSampler{4, 8, 0.6, BoundaryMode::Free}.sample(*g, 0);
  for (double r : {1.1, 1.7, 2.9}) {
    const double h = 1e-6;
    const Complex fd = (f.value(r + h) - f.value(r - h)) / (2.0 * h);
    CHECK(std::abs(fd - f.derivative(r)) < 1e-6 * (1.0 + std::abs(fd)));
  }
}

TEST_CASE("sampler modes and determinism") {
  const GridPtr g = build_grid(64, 2.0);
  const TestFunctionSampler dir{3, 8, 0.6, BoundaryMode::Dirichlet};
  const TestFunction d = dir.sample(*g, 12);
  CHECK(std::abs(d.value(1.0)) < 1e-14);
  CHECK(std::abs(d.value(2.0)) < 1e-12);
  const TestFunctionSampler mz{3, 8, 0.6, BoundaryMode::MeanZero};
  const TestFunction m = mz.sample(*g, 12);
  Complex mean = 0.0;
  for (int j = 0; j < g->n_points; ++j) mean += m.value(g->nodes(j)) * g->quad_weights(j);
  CHECK(std::abs(mean) < 1e-12);
  // sample i does not depend on which samples were drawn before it
  const TestFunction a = dir.sample(*g, 7);
  dir.sample(*g, 100);
  const TestFunction b = dir.sample(*g, 7);
  CHECK(a.sin_coeff == b.sin_coeff);
  CHECK(a.sin_coeff != dir.sample(*g, 8).sin_coeff);
  CHECK(a.sin_coeff != TestFunctionSampler({4, 8, 0.6, BoundaryMode::Dirichlet}).sample(*g, 7).sin_coeff);
}

TEST_CASE("sup_on_interval") {
  CHECK(sup_on_interval([](double r) { return (r - 1.0) * (2.0 - r); }, 2.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(sup_on_interval([](double r) { return r * r; }, 3.0) == doctest::Approx(9.0));
}

TEST_CASE("A1 on constants and zero") {
  for (double R : {1.5, 2.0, 4.0}) {
    const GridPtr g = build_grid(64, R);
    CHECK(a1_ratio(constant(R, Complex(2.0, -1.0)), *g, false) == doctest::Approx((R - 1.0) / (R * std::log(R))).epsilon(1e-10));
    CHECK(a1_ratio(constant(R, 0.0), *g, false) == 0.0);
  }
  const GridPtr g = build_grid(64, 2.0);
  CHECK(a2_ratio(constant(2.0, 0.0), *g) == 0.0);
  CHECK(a5_ratios(constant(2.0, 0.0), *g).first == 0.0);
}

TEST_CASE("ratios are invariant under rescaling") {
  const GridPtr g = build_grid(64, 2.0);
  const TestFunctionSampler free{9, 8, 0.6, BoundaryMode::Free}, dir{9, 8, 0.6, BoundaryMode::Dirichlet};
  for (std::uint64_t i = 0; i < 20; ++i) {
    const TestFunction f = free.sample(*g, i), d = dir.sample(*g, i);
    CHECK(a1_ratio(scaled(f, 7.0), *g, false) == doctest::Approx(a1_ratio(f, *g, false)).epsilon(1e-12));
    CHECK(a2_ratio(scaled(d, 7.0), *g) == doctest::Approx(a2_ratio(d, *g)).epsilon(1e-12));
    CHECK(a5_ratios(scaled(d, 7.0), *g).second == doctest::Approx(a5_ratios(d, *g).second).epsilon(1e-12));
  }
}

TEST_CASE("explicit-constant inequalities hold on 1000 samples") {
  for (double R : {1.5, 2.0, 4.0}) {
    const GridPtr g = build_grid(128, R);
    std::vector<LemmaReport> all = check_sobolev_a1(1000, *g, 1);
    for (auto&& batch : {check_weighted_linf_a2(1000, *g, 1), check_poincare_a5(1000, *g, 1)})
      all.insert(all.end(), batch.begin(), batch.end());
    CHECK(all.size() == 5);
    for (const auto& r : all) {
      INFO(r.name << " R=" << R << " worst=" << r.worst_ratio << " at " << r.worst_index);
      CHECK(r.pass);
      CHECK(r.worst_ratio > 0.0);
      CHECK(r.bound == 1.0 + kExplicitTolerance);
    }
  }
}

TEST_CASE("elliptic bounds stay under the calibrated constants") {
  for (double R : {1.5, 4.0}) {
    const GridPtr g = build_grid(96, R);
    std::vector<LemmaReport> all = check_elliptic_a4(300, g, 2);
    const auto a6 = check_elliptic_a6(300, g, 2);
    all.insert(all.end(), a6.begin(), a6.end());
    CHECK(all.size() == 10);
    for (const auto& r : all) {
      INFO(r.name << " R=" << R << " worst=" << r.worst_ratio);
      CHECK(r.pass);
    }
  }
}

TEST_CASE("reports are reproducible") {
  const GridPtr g = build_grid(64, 2.0);
  const auto a = check_sobolev_a1(200, *g, 7), b = check_sobolev_a1(200, *g, 7);
  CHECK(a[0].worst_ratio == b[0].worst_ratio);
  CHECK(a[0].worst_index == b[0].worst_index);
  CHECK_THROWS_AS(check_sobolev_a1(0, *g, 7), ConfigError);
}
