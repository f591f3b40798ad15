#pragma once

#include "rotmix/family.hpp"
#include "rotmix/types.hpp"

namespace rotmix {

// Observations as an empirical distribution: row i of `points` is x_i,
// upsilon holds the (normalized) empirical weights on the n-simplex.
struct Dataset {
  Mat points;   // n x d
  Vec upsilon;  // n, positive, sums to 1

  Eigen::Index n() const { return points.rows(); }
  Eigen::Index d() const { return points.cols(); }
};

// A k-component mixture: weights omega on the k-simplex and one
// expectation parameter per component (row j of `xis`).
struct MixtureModel {
  Family family;
  Vec omega;  // k
  Mat xis;    // k x d

  Eigen::Index k() const { return omega.size(); }
};

// Throw ValidationError when an invariant fails; used at API boundaries
// (loaders, fit entry) rather than in inner loops.
void validate(const Dataset& data, const Family& family);
void validate(const MixtureModel& model);

}  // namespace rotmix
