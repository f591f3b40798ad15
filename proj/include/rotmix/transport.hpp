#pragma once

#include "rotmix/family.hpp"
#include "rotmix/model.hpp"
#include "rotmix/types.hpp"

namespace rotmix {

// Likelihood transport cost, gamma_ij = -(log omega_j + log p_{xi_j}(x_i)).
struct CostMatrix {
  Mat gamma;  // n x k
};

// Memberships pi_ij >= 0 with row sums equal to the empirical weights.
struct TransportPlan {
  Mat pi;          // n x k
  Vec row_masses;  // upsilon
};

enum class RegKind { none, entropic, quadratic };

// Row-separable convex potential phi with penalty lambda. kind == none
// iff lambda < kLambdaMin; make() enforces that normalization.
struct RegularizerSpec {
  RegKind kind = RegKind::none;
  double lambda = 0.0;

  static RegularizerSpec make(RegKind kind, double lambda);

  // Elementwise potential and its derivative. Entropic uses the
  // convention t*(log t - 1) -> 0 as t -> 0, so phi is finite on the
  // closed simplex and hard plans have a well-defined objective.
  double phi_value(double t) const;
  double phi_grad(double t) const;
  double phi(const Mat& pi) const;
};

RegKind reg_kind_from_string(const std::string& s);
std::string to_string(RegKind kind);

// gamma_ij = -log omega_j - log p_{xi_j}(x_i). Requires all omega_j > 0;
// components with zero weight must be pruned first.
CostMatrix cost_matrix(const Family& family, const MixtureModel& model,
                       const Dataset& data);

// lambda = 0 plan: row i puts all of upsilon_i on the smallest cost,
// lowest index winning ties.
TransportPlan estep_hard(const CostMatrix& gamma, const Vec& upsilon);

// Entropic plan, computed in the log domain with max subtraction:
// row i = upsilon_i * softmax_j((log omega_j + log p_j(x_i)) / lambda).
// lambda < kLambdaMin dispatches to estep_hard.
TransportPlan estep_entropic(const Family& family, const MixtureModel& model,
                             const Dataset& data, double lambda);

// Same solver fed with a precomputed cost matrix (logits are -gamma).
TransportPlan estep_entropic_from_cost(const CostMatrix& gamma, const Vec& upsilon,
                                       double lambda);

// Quadratic-regularizer plan: row i is the Euclidean projection of
// -gamma_i / lambda onto the simplex scaled by upsilon_i (sorted
// threshold algorithm). Rejects lambda == 0.
TransportPlan estep_quadratic(const CostMatrix& gamma, const Vec& upsilon,
                              double lambda);

// B_phi(pi_star || pi_tilde); test-support value for asserting that a plan
// is the Bregman projection of pi_tilde onto the relaxed polytope.
double bregman_projection_check(const TransportPlan& pi_star, const Mat& pi_tilde,
                                const RegularizerSpec& reg);

// Shannon entropy of each row of pi normalized by its mass; in [0, log k].
Vec plan_entropy(const TransportPlan& plan);
double mean_row_entropy(const TransportPlan& plan);

}  // namespace rotmix
