#pragma once

#include <Eigen/Core>

namespace rotmix {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Entropic E-steps with lambda below this dispatch to the hard solver:
// the exponent 1/lambda saturates double exponentials even after
// max-subtraction, and the limit is the hard plan anyway.
inline constexpr double kLambdaMin = 1e-12;

// Expectation parameters are clamped this far into the interior of the
// expectation domain before inversion to natural coordinates.
inline constexpr double kBoundaryEps = 1e-10;

}  // namespace rotmix
