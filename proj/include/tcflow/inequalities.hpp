#pragma once

#include "tcflow/grid.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tcflow {

enum class BoundaryMode { Free, Dirichlet, MeanZero };
const char* to_string(BoundaryMode m);

/// f(r) = sum_j a_j cos(j pi s) + b_j sin(j pi s) - shift, s = log r / log R, with complex
/// coefficients. Dirichlet samples keep only the sine part; mean-zero samples subtract the mean.
struct TestFunction {
  double R = 2.0;
  std::vector<Complex> cos_coeff;  // j = 0 .. J
  std::vector<Complex> sin_coeff;  // j = 0 .. J (index 0 unused)
  Complex shift = 0.0;

  Complex value(double r) const;
  Complex derivative(double r) const;
};

/// Random Fourier-in-log-r series with geometrically decaying coefficients. Sample i draws from
/// its own mt19937_64 stream seeded by (seed, i), so results do not depend on scheduling.
struct TestFunctionSampler {
  std::uint64_t seed = 0;
  int terms = 8;
  double decay = 0.6;
  BoundaryMode mode = BoundaryMode::Free;

  TestFunction sample(const RadialGrid& grid, std::uint64_t index) const;
};

/// sup over [1, R] of a non-negative function: uniform scan in log r, then golden-section polish.
double sup_on_interval(const std::function<double(double)>& f, double R, int scan = 2049);

struct LemmaReport {
  std::string name;
  double R = 0.0;
  std::string mode;
  int samples = 0;
  double worst_ratio = 0.0;
  double bound = 1.0;  // pass iff worst_ratio <= bound (explicit constants: 1 + 1e-6)
  bool pass = true;
  long worst_index = -1;
};

/// Frozen "lesssim" constants: twice the largest ratio over a 10^4-sample calibration
/// (R in {1.5, 2, 4}, N = 128, seed 1).
namespace calibrated {
inline constexpr double kA4Energy = 1.5;   // (||phi'||^2 + k^2 ||phi/r||^2) / (k^-2 ||r w||^2); max 0.743
inline constexpr double kA4L1 = 0.45;      // (||phi'||^2 + k^2 ||phi/r||^2) / (k^-1 ||r^{1/2} w||_{L^1}^2); max 0.219
inline constexpr double kA4Sup = 1.75;     // sup-norm bound over (R/(R-1))^{1/2} k^{-1/2} ||r w||; max 0.875
inline constexpr double kA6 = 0.42;        // ||phi'||_inf / ((R/(R-1))^{1/2} (1 + log R) ||r^{3/2} w||); max 0.207
}  // namespace calibrated

inline constexpr double kExplicitTolerance = 1e-6;

std::vector<LemmaReport> check_sobolev_a1(int samples, const RadialGrid& grid, std::uint64_t seed);
std::vector<LemmaReport> check_weighted_linf_a2(int samples, const RadialGrid& grid, std::uint64_t seed);
std::vector<LemmaReport> check_elliptic_a4(int samples, const GridPtr& grid, std::uint64_t seed,
                                           const std::vector<int>& ks = {1, 2, 4});
std::vector<LemmaReport> check_poincare_a5(int samples, const RadialGrid& grid, std::uint64_t seed);
std::vector<LemmaReport> check_elliptic_a6(int samples, const GridPtr& grid, std::uint64_t seed);

/// Single-sample ratios, exposed for tests.
double a1_ratio(const TestFunction& f, const RadialGrid& grid, bool dirichlet);
double a2_ratio(const TestFunction& f, const RadialGrid& grid);
std::pair<double, double> a5_ratios(const TestFunction& f, const RadialGrid& grid);

}  // namespace tcflow
