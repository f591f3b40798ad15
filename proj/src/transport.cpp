#include "rotmix/transport.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rotmix/errors.hpp"

namespace rotmix {

RegularizerSpec RegularizerSpec::make(RegKind kind, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw ValidationError("regularizer: lambda must be finite and >= 0");
  RegularizerSpec reg;
  reg.lambda = lambda;
  reg.kind = lambda < kLambdaMin ? RegKind::none : kind;
  return reg;
}

double RegularizerSpec::phi_value(double t) const {
  switch (kind) {
    case RegKind::none:
      return 0.0;
    case RegKind::entropic:
      return t == 0.0 ? 0.0 : t * (std::log(t) - 1.0);
    case RegKind::quadratic:
      return 0.5 * t * t;
  }
  return 0.0;
}

double RegularizerSpec::phi_grad(double t) const {
  switch (kind) {
    case RegKind::none:
      return 0.0;
    case RegKind::entropic:
      return std::log(t);
    case RegKind::quadratic:
      return t;
  }
  return 0.0;
}

double RegularizerSpec::phi(const Mat& pi) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < pi.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < pi.cols(); ++j) row += phi_value(pi(i, j));
    total += row;
  }
  return total;
}

RegKind reg_kind_from_string(const std::string& s) {
  if (s == "none") return RegKind::none;
  if (s == "entropic") return RegKind::entropic;
  if (s == "quadratic") return RegKind::quadratic;
  throw ValidationError("unknown regularizer '" + s +
                        "' (expected none, entropic or quadratic)");
}

std::string to_string(RegKind kind) {
  switch (kind) {
    case RegKind::none:
      return "none";
    case RegKind::entropic:
      return "entropic";
    case RegKind::quadratic:
      return "quadratic";
  }
  return "none";
}

CostMatrix cost_matrix(const Family& family, const MixtureModel& model,
                       const Dataset& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index k = model.k();
  for (Eigen::Index j = 0; j < k; ++j)
    if (!(model.omega[j] > 0.0))
      throw ValidationError("cost_matrix: component " + std::to_string(j) +
                            " has zero weight; prune it first");

  std::vector<NaturalParam> thetas;
  thetas.reserve(k);
  Vec log_omega(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    thetas.push_back(to_natural(family, ExpectationParam{model.xis.row(j)}));
    log_omega[j] = std::log(model.omega[j]);
  }

  CostMatrix cost;
  cost.gamma.resize(n, k);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec x = data.points.row(i);
    for (Eigen::Index j = 0; j < k; ++j)
      cost.gamma(i, j) = -log_omega[j] - log_density(family, thetas[j], x);
  }
  return cost;
}

TransportPlan estep_hard(const CostMatrix& gamma, const Vec& upsilon) {
  const Eigen::Index n = gamma.gamma.rows();
  const Eigen::Index k = gamma.gamma.cols();
  if (upsilon.size() != n)
    throw ValidationError("estep_hard: upsilon size does not match cost rows");

  TransportPlan plan;
  plan.pi = Mat::Zero(n, k);
  plan.row_masses = upsilon;
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < k; ++j)
      if (gamma.gamma(i, j) < gamma.gamma(i, best)) best = j;  // lowest index wins ties
    plan.pi(i, best) = upsilon[i];
  }
  return plan;
}

namespace {

// Threshold for the Euclidean projection of z onto {w >= 0, sum w = mass}.
// `sorted` must hold z in descending order.
inline double simplex_threshold(const std::vector<double>& sorted, double mass) {
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t m = 0; m < sorted.size(); ++m) {
    cumsum += sorted[m];
    const double candidate = (cumsum - mass) / static_cast<double>(m + 1);
    if (sorted[m] - candidate > 0.0) tau = candidate;
  }
  return tau;
}

}  // namespace

TransportPlan estep_entropic_from_cost(const CostMatrix& gamma, const Vec& upsilon,
                                       double lambda) {
  if (lambda < kLambdaMin) return estep_hard(gamma, upsilon);
  const Eigen::Index n = gamma.gamma.rows();
  const Eigen::Index k = gamma.gamma.cols();
  if (upsilon.size() != n)
    throw ValidationError("estep_entropic: upsilon size does not match cost rows");

  TransportPlan plan;
  plan.pi.resize(n, k);
  plan.row_masses = upsilon;
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double top = -gamma.gamma(i, 0);
    for (Eigen::Index j = 1; j < k; ++j) top = std::max(top, -gamma.gamma(i, j));
    double z = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double e = std::exp((-gamma.gamma(i, j) - top) / lambda);
      plan.pi(i, j) = e;
      z += e;
    }
    for (Eigen::Index j = 0; j < k; ++j)
      plan.pi(i, j) = upsilon[i] * (plan.pi(i, j) / z);
  }
  return plan;
}

TransportPlan estep_entropic(const Family& family, const MixtureModel& model,
                             const Dataset& data, double lambda) {
  return estep_entropic_from_cost(cost_matrix(family, model, data), data.upsilon,
                                  lambda);
}

TransportPlan estep_quadratic(const CostMatrix& gamma, const Vec& upsilon,
                              double lambda) {
  if (!(lambda > 0.0))
    throw ValidationError("estep_quadratic: lambda must be > 0; use estep_hard");
  const Eigen::Index n = gamma.gamma.rows();
  const Eigen::Index k = gamma.gamma.cols();
  if (upsilon.size() != n)
    throw ValidationError("estep_quadratic: upsilon size does not match cost rows");

  TransportPlan plan;
  plan.pi.resize(n, k);
  plan.row_masses = upsilon;
#pragma omp parallel
  {
    std::vector<double> sorted(k);
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) sorted[j] = -gamma.gamma(i, j) / lambda;
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      const double tau = simplex_threshold(sorted, upsilon[i]);
      for (Eigen::Index j = 0; j < k; ++j)
        plan.pi(i, j) = std::max(-gamma.gamma(i, j) / lambda - tau, 0.0);
    }
  }
  return plan;
}

double bregman_projection_check(const TransportPlan& pi_star, const Mat& pi_tilde,
                                const RegularizerSpec& reg) {
  if (pi_star.pi.rows() != pi_tilde.rows() || pi_star.pi.cols() != pi_tilde.cols())
    throw ValidationError("bregman_projection_check: shape mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < pi_tilde.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < pi_tilde.cols(); ++j) {
      const double p = pi_star.pi(i, j);
      const double q = pi_tilde(i, j);
      row += reg.phi_value(p) - reg.phi_value(q) - (p - q) * reg.phi_grad(q);
    }
    total += row;
  }
  return total;
}

Vec plan_entropy(const TransportPlan& plan) {
  const Eigen::Index n = plan.pi.rows();
  const Eigen::Index k = plan.pi.cols();
  Vec entropy(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mass = plan.row_masses[i];
    double h = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double p = plan.pi(i, j) / mass;
      if (p > 0.0) h -= p * std::log(p);
    }
    entropy[i] = h;
  }
  return entropy;
}

double mean_row_entropy(const TransportPlan& plan) {
  const Vec h = plan_entropy(plan);
  double total = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) total += h[i];
  return total / static_cast<double>(h.size());
}

}  // namespace rotmix
