#include "tcflow/imex.hpp"

namespace tcflow {

ModeStepper::ModeStepper(const CMat& op, double dt) : dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  const CMat ident = CMat::Identity(op.rows(), op.cols());
  euler_lu_.compute(ident + dt * op);
  bdf2_lu_.compute(ident + (2.0 / 3.0) * dt * op);
}

CVec ModeStepper::euler(const CVec& w, const CVec& f) const { return euler_lu_.solve(w + dt_ * f); }

CVec ModeStepper::bdf2(const CVec& w, const CVec& w_prev, const CVec& f, const CVec& f_prev) const {
  const CVec rhs = (4.0 * w - w_prev) / 3.0 + (2.0 / 3.0) * dt_ * (2.0 * f - f_prev);
  return bdf2_lu_.solve(rhs);
}

}  // namespace tcflow
