#pragma once

#include <functional>
#include <optional>
#include <string>

#include "rotmix/types.hpp"

namespace rotmix {

// Natural coordinates theta of an exponential-family density
// p_theta(x) = exp(<x, theta> - psi(theta)) * h(x).
struct NaturalParam {
  Vec theta;
};

// Expectation coordinates xi = grad_psi(theta).
struct ExpectationParam {
  Vec xi;
};

// An exponential family in natural parametrization, defined by its
// log-partition psi, the coordinate bijection grad_psi / grad_psi_inv,
// the carrier term log h(x), and domain predicates. Instances are
// immutable after construction and safe to share across threads.
struct Family {
  std::string name;
  int dim = 0;

  std::function<double(const Vec&)> psi;
  std::function<Vec(const Vec&)> grad_psi;
  std::function<Vec(const Vec&)> grad_psi_inv;
  std::function<double(const Vec&)> log_carrier;

  std::function<bool(const Vec&)> natural_domain;
  std::function<bool(const Vec&)> expectation_domain;
  std::function<bool(const Vec&)> data_domain;

  // Legendre dual psi*(y) = <y, grad_psi_inv(y)> - psi(grad_psi_inv(y)),
  // extended by its limit values to the closure of the expectation domain
  // so it can be evaluated at raw data points (e.g. Bernoulli x in {0,1}).
  std::function<double(const Vec&)> psi_dual;

  // Closed-form divergence override used when the generic dual-Bregman
  // expression and the textbook form should coincide bit for bit.
  std::optional<std::function<double(const Vec&, const Vec&)>> dual_div;
};

// Built-in families.
Family gaussian_spherical(int dim);
Family poisson();
Family bernoulli();
Family exponential();

// Lookup by identifier: gaussian_spherical, poisson, bernoulli, exponential.
// `dim` applies to gaussian_spherical only; the others are univariate.
Family make_family(const std::string& name, int dim = 1);

// log p_theta(x) = <x, theta> - psi(theta) + log h(x).
double log_density(const Family& family, const NaturalParam& theta, const Vec& x);

// B_psi(a || b) = psi(a) - psi(b) - <a - b, grad_psi(b)>.
double bregman_div(const std::function<double(const Vec&)>& psi,
                   const std::function<Vec(const Vec&)>& grad_psi, const Vec& a,
                   const Vec& b);

ExpectationParam to_expectation(const Family& family, const NaturalParam& theta);

// Inverse coordinate map. Boundary expectation values are clamped into the
// interior by kBoundaryEps first; *clamped reports whether that happened.
NaturalParam to_natural(const Family& family, const ExpectationParam& xi,
                        bool* clamped = nullptr);

// Clamp an expectation vector into the interior of the expectation domain.
Vec clamp_expectation(const Family& family, const Vec& xi, bool* clamped = nullptr);

// Divergence between a data point and a component mean, measured in
// expectation coordinates: B_{psi*}(x || xi). Zero iff x == xi; for
// gaussian_spherical this is half the squared Euclidean distance.
double dual_bregman_data_div(const Family& family, const Vec& x,
                             const ExpectationParam& xi);

}  // namespace rotmix
