#include "rotmix/family.hpp"

#include <cmath>

#include "rotmix/errors.hpp"

namespace rotmix {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

bool all_finite(const Vec& v) { return v.allFinite(); }

// log(1 + e^t) without overflow.
double log1p_exp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

bool is_integer(double v) { return v == std::floor(v); }

void check_dim(const Family& f, const Vec& v, const char* what) {
  if (v.size() != f.dim)
    throw ValidationError(f.name + ": " + what + " has dimension " +
                          std::to_string(v.size()) + ", expected " +
                          std::to_string(f.dim));
}

}  // namespace

Family gaussian_spherical(int dim) {
  if (dim < 1) throw ValidationError("gaussian_spherical: dim must be >= 1");
  Family f;
  f.name = "gaussian_spherical";
  f.dim = dim;
  f.psi = [](const Vec& t) { return 0.5 * t.squaredNorm(); };
  f.grad_psi = [](const Vec& t) { return t; };
  f.grad_psi_inv = [](const Vec& y) { return y; };
  f.log_carrier = [dim](const Vec& x) {
    return -0.5 * x.squaredNorm() - 0.5 * dim * kLogTwoPi;
  };
  f.natural_domain = all_finite;
  f.expectation_domain = all_finite;
  f.data_domain = all_finite;
  f.psi_dual = [](const Vec& y) { return 0.5 * y.squaredNorm(); };
  f.dual_div = [](const Vec& x, const Vec& xi) {
    return 0.5 * (x - xi).squaredNorm();
  };
  return f;
}

Family poisson() {
  Family f;
  f.name = "poisson";
  f.dim = 1;
  f.psi = [](const Vec& t) { return std::exp(t[0]); };
  f.grad_psi = [](const Vec& t) { return Vec::Constant(1, std::exp(t[0])); };
  f.grad_psi_inv = [](const Vec& y) { return Vec::Constant(1, std::log(y[0])); };
  // log(x!) via lgamma, safe for large counts
  f.log_carrier = [](const Vec& x) { return -std::lgamma(x[0] + 1.0); };
  f.natural_domain = all_finite;
  f.expectation_domain = [](const Vec& y) { return y.allFinite() && y[0] > 0.0; };
  f.data_domain = [](const Vec& x) {
    return x.allFinite() && x[0] >= 0.0 && is_integer(x[0]);
  };
  // psi*(y) = y log y - y, with limit 0 at y = 0
  f.psi_dual = [](const Vec& y) {
    return y[0] == 0.0 ? 0.0 : y[0] * std::log(y[0]) - y[0];
  };
  return f;
}

Family bernoulli() {
  Family f;
  f.name = "bernoulli";
  f.dim = 1;
  f.psi = [](const Vec& t) { return log1p_exp(t[0]); };
  f.grad_psi = [](const Vec& t) {
    return Vec::Constant(1, 1.0 / (1.0 + std::exp(-t[0])));
  };
  f.grad_psi_inv = [](const Vec& y) {
    return Vec::Constant(1, std::log(y[0] / (1.0 - y[0])));
  };
  f.log_carrier = [](const Vec&) { return 0.0; };
  f.natural_domain = all_finite;
  f.expectation_domain = [](const Vec& y) {
    return y.allFinite() && y[0] > 0.0 && y[0] < 1.0;
  };
  f.data_domain = [](const Vec& x) { return x[0] == 0.0 || x[0] == 1.0; };
  // psi*(y) = y log y + (1-y) log(1-y), limits 0 at y in {0,1}
  f.psi_dual = [](const Vec& y) {
    const double p = y[0];
    double s = 0.0;
    if (p > 0.0) s += p * std::log(p);
    if (p < 1.0) s += (1.0 - p) * std::log(1.0 - p);
    return s;
  };
  return f;
}

Family exponential() {
  Family f;
  f.name = "exponential";
  f.dim = 1;
  f.psi = [](const Vec& t) { return -std::log(-t[0]); };
  f.grad_psi = [](const Vec& t) { return Vec::Constant(1, -1.0 / t[0]); };
  f.grad_psi_inv = [](const Vec& y) { return Vec::Constant(1, -1.0 / y[0]); };
  f.log_carrier = [](const Vec&) { return 0.0; };
  f.natural_domain = [](const Vec& t) { return t.allFinite() && t[0] < 0.0; };
  f.expectation_domain = [](const Vec& y) { return y.allFinite() && y[0] > 0.0; };
  f.data_domain = [](const Vec& x) { return x.allFinite() && x[0] > 0.0; };
  // psi*(y) = -1 - log y
  f.psi_dual = [](const Vec& y) { return -1.0 - std::log(y[0]); };
  return f;
}

Family make_family(const std::string& name, int dim) {
  if (name == "gaussian_spherical") return gaussian_spherical(dim);
  if (name == "poisson") return poisson();
  if (name == "bernoulli") return bernoulli();
  if (name == "exponential") return exponential();
  throw ValidationError("unknown family '" + name +
                        "' (expected gaussian_spherical, poisson, bernoulli or "
                        "exponential)");
}

double log_density(const Family& family, const NaturalParam& theta, const Vec& x) {
  check_dim(family, theta.theta, "natural parameter");
  check_dim(family, x, "observation");
  if (!family.data_domain(x))
    throw ValidationError(family.name + ": observation violates data_domain");
  if (!family.natural_domain(theta.theta))
    throw ValidationError(family.name + ": parameter violates natural_domain");
  return x.dot(theta.theta) - family.psi(theta.theta) + family.log_carrier(x);
}

double bregman_div(const std::function<double(const Vec&)>& psi,
                   const std::function<Vec(const Vec&)>& grad_psi, const Vec& a,
                   const Vec& b) {
  if (a.size() != b.size())
    throw ValidationError("bregman_div: mismatched dimensions");
  const double value = psi(a) - psi(b) - (a - b).dot(grad_psi(b));
  if (!std::isfinite(value))
    throw ValidationError("bregman_div: arguments outside the function domain");
  return value;
}

ExpectationParam to_expectation(const Family& family, const NaturalParam& theta) {
  check_dim(family, theta.theta, "natural parameter");
  if (!family.natural_domain(theta.theta))
    throw ValidationError(family.name + ": parameter violates natural_domain");
  return ExpectationParam{family.grad_psi(theta.theta)};
}

Vec clamp_expectation(const Family& family, const Vec& xi, bool* clamped) {
  Vec out = xi;
  bool touched = false;
  if (family.name == "bernoulli") {
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (out[i] < kBoundaryEps) out[i] = kBoundaryEps, touched = true;
      if (out[i] > 1.0 - kBoundaryEps) out[i] = 1.0 - kBoundaryEps, touched = true;
    }
  } else if (family.name == "poisson" || family.name == "exponential") {
    for (Eigen::Index i = 0; i < out.size(); ++i)
      if (out[i] < kBoundaryEps) out[i] = kBoundaryEps, touched = true;
  }
  if (clamped) *clamped = touched;
  if (!family.expectation_domain(out))
    throw ValidationError(family.name +
                          ": value violates expectation_domain even after clamping");
  return out;
}

NaturalParam to_natural(const Family& family, const ExpectationParam& xi,
                        bool* clamped) {
  check_dim(family, xi.xi, "expectation parameter");
  return NaturalParam{family.grad_psi_inv(clamp_expectation(family, xi.xi, clamped))};
}

double dual_bregman_data_div(const Family& family, const Vec& x,
                             const ExpectationParam& xi) {
  check_dim(family, x, "observation");
  check_dim(family, xi.xi, "expectation parameter");
  if (!family.data_domain(x))
    throw ValidationError(family.name + ": observation violates data_domain");
  if (!family.expectation_domain(xi.xi))
    throw ValidationError(family.name + ": mean violates expectation_domain");
  if (family.dual_div) return (*family.dual_div)(x, xi.xi);
  const Vec theta = family.grad_psi_inv(xi.xi);
  return family.psi_dual(x) - family.psi_dual(xi.xi) - (x - xi.xi).dot(theta);
}

}  // namespace rotmix
