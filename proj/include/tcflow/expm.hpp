#pragma once

#include "tcflow/common.hpp"

namespace tcflow {

/// Matrix exponential by scaling and squaring with a diagonal Pade approximant
/// (degree 3, 5, 7, 9 or 13 chosen from the 1-norm; Higham 2005 thresholds).
CMat expm(const CMat& a);

}  // namespace tcflow
