#include "rotmix/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rotmix/errors.hpp"

namespace rotmix::reference {

CostMatrix cost_matrix(const Family& family, const MixtureModel& model,
                       const Dataset& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index k = model.k();
  CostMatrix cost;
  cost.gamma.resize(n, k);
  std::vector<NaturalParam> thetas;
  Vec log_omega(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    thetas.push_back(to_natural(family, ExpectationParam{model.xis.row(j)}));
    log_omega[j] = std::log(model.omega[j]);
  }
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
  TransportPlan plan;
  plan.pi = Mat::Zero(n, k);
  plan.row_masses = upsilon;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < k; ++j)
      if (gamma.gamma(i, j) < gamma.gamma(i, best)) best = j;
    plan.pi(i, best) = upsilon[i];
  }
  return plan;
}

TransportPlan estep_entropic_from_cost(const CostMatrix& gamma, const Vec& upsilon,
                                       double lambda) {
  if (lambda < kLambdaMin) return estep_hard(gamma, upsilon);
  const Eigen::Index n = gamma.gamma.rows();
  const Eigen::Index k = gamma.gamma.cols();
  TransportPlan plan;
  plan.pi.resize(n, k);
  plan.row_masses = upsilon;
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

TransportPlan estep_quadratic(const CostMatrix& gamma, const Vec& upsilon,
                              double lambda) {
  if (!(lambda > 0.0))
    throw ValidationError("estep_quadratic: lambda must be > 0; use estep_hard");
  const Eigen::Index n = gamma.gamma.rows();
  const Eigen::Index k = gamma.gamma.cols();
  TransportPlan plan;
  plan.pi.resize(n, k);
  plan.row_masses = upsilon;
  std::vector<double> sorted(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) sorted[j] = -gamma.gamma(i, j) / lambda;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumsum = 0.0;
    double tau = 0.0;
    for (Eigen::Index m = 0; m < k; ++m) {
      cumsum += sorted[m];
      const double candidate = (cumsum - upsilon[i]) / static_cast<double>(m + 1);
      if (sorted[m] - candidate > 0.0) tau = candidate;
    }
    for (Eigen::Index j = 0; j < k; ++j)
      plan.pi(i, j) = std::max(-gamma.gamma(i, j) / lambda - tau, 0.0);
  }
  return plan;
}

Mat m_step(const Family& family, const TransportPlan& plan, const Vec& omega,
           const Dataset& data) {
  const Eigen::Index n = plan.pi.rows();
  const Eigen::Index k = plan.pi.cols();
  Mat xis(k, data.d());
  for (Eigen::Index j = 0; j < k; ++j) {
    Vec acc = Vec::Zero(data.d());
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = plan.pi(i, j);
      if (p > 0.0) acc += p * data.points.row(i).transpose();
    }
    xis.row(j) = clamp_expectation(family, acc / omega[j]);
  }
  return xis;
}

double objective_from_cost(const TransportPlan& plan, const CostMatrix& gamma,
                           const RegularizerSpec& reg) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < plan.pi.rows(); ++i) {
    double dot = 0.0;
    double phi = 0.0;
    for (Eigen::Index j = 0; j < plan.pi.cols(); ++j) {
      const double p = plan.pi(i, j);
      if (p > 0.0) dot += p * gamma.gamma(i, j);
      phi += reg.phi_value(p);
    }
    total += dot + reg.lambda * phi;
  }
  return total;
}

}  // namespace rotmix::reference
