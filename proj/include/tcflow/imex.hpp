#pragma once

#include "tcflow/common.hpp"

#include <Eigen/LU>

namespace tcflow {

/// Implicit-explicit stepping for dw/dt + L w = f: L implicit, f explicit.
///
/// The second-order scheme is semi-implicit BDF2,
///   (3 w^{n+1} - 4 w^n + w^{n-1}) / (2 dt) + L w^{n+1} = 2 f^n - f^{n-1},
/// started by one implicit-explicit Euler step. Both systems are factored once.
class ModeStepper {
 public:
  ModeStepper() = default;
  ModeStepper(const CMat& op, double dt);

  CVec euler(const CVec& w, const CVec& f) const;
  CVec bdf2(const CVec& w, const CVec& w_prev, const CVec& f, const CVec& f_prev) const;
  double dt() const { return dt_; }

 private:
  double dt_ = 0.0;
  Eigen::PartialPivLU<CMat> euler_lu_;
  Eigen::PartialPivLU<CMat> bdf2_lu_;
};

}  // namespace tcflow
