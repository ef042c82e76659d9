#include "tcflow/expm.hpp"

#include <Eigen/LU>

#include <array>
#include <cmath>

namespace tcflow {

namespace {

// Largest 1-norms for which the [m/m] approximant reaches unit roundoff in double.
constexpr std::array<double, 5> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                          9.504178996162932e-1, 2.097847961257068e0,
                                          5.371920351148152e0};
constexpr std::array<int, 5> kDegree = {3, 5, 7, 9, 13};

void pade_low(const CMat& a, int m, CMat& u, CMat& v) {
  static const double b3[] = {120., 60., 12., 1.};
  static const double b5[] = {30240., 15120., 3360., 420., 30., 1.};
  static const double b7[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  static const double b9[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                              2162160.,     110880.,     3960.,       90.,        1.};
  const double* b = m == 3 ? b3 : m == 5 ? b5 : m == 7 ? b7 : b9;
  const Eigen::Index n = a.rows();
  const CMat ident = CMat::Identity(n, n);
  const CMat a2 = a * a;
  CMat power = ident;
  CMat odd = b[1] * ident;
  CMat even = b[0] * ident;
  for (int j = 1; 2 * j <= m; ++j) {
    power = power * a2;
    odd += b[2 * j + 1] * power;
    even += b[2 * j] * power;
  }
  u = a * odd;
  v = even;
}

void pade13(const CMat& a, CMat& u, CMat& v) {
  static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                             1187353796428800.,  129060195264000.,   10559470521600.,
                             670442572800.,      33522128640.,       1323241920.,
                             40840800.,          960960.,            16380.,
                             182.,               1.};
  const Eigen::Index n = a.rows();
  const CMat ident = CMat::Identity(n, n);
  const CMat a2 = a * a;
  const CMat a4 = a2 * a2;
  const CMat a6 = a4 * a2;
  const CMat inner_u = b[13] * a6 + b[11] * a4 + b[9] * a2;
  u = a * (a6 * inner_u + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  const CMat inner_v = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v = a6 * inner_v + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
}

double norm1(const CMat& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

CMat expm(const CMat& a) {
  if (a.rows() != a.cols()) throw ShapeError("expm: matrix must be square");
  if (a.size() == 0) return a;
  const double anorm = norm1(a);
  if (!std::isfinite(anorm)) throw DomainError("expm: non-finite matrix");

  CMat u, v;
  for (std::size_t i = 0; i < 4; ++i) {
    if (anorm <= kTheta[i]) {
      pade_low(a, kDegree[i], u, v);
      return (v - u).partialPivLu().solve(v + u);
    }
  }
  int squarings = 0;
  if (anorm > kTheta[4]) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(anorm / kTheta[4]))));
  const CMat scaled = a * std::ldexp(1.0, -squarings);
  pade13(scaled, u, v);
  CMat result = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

}  // namespace tcflow
