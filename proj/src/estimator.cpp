#include "rotmix/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rotmix/errors.hpp"
#include "rotmix/random.hpp"

namespace rotmix {

InitMethod init_method_from_string(const std::string& s) {
  if (s == "kmeanspp") return InitMethod::kmeanspp;
  if (s == "random" || s == "random_points") return InitMethod::random_points;
  throw ValidationError("unknown init method '" + s +
                        "' (expected kmeanspp or random)");
}

std::string to_string(InitMethod m) {
  return m == InitMethod::kmeanspp ? "kmeanspp" : "random_points";
}

std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged:
      return "converged";
    case FitStatus::max_iters:
      return "max_iters";
    case FitStatus::degenerate:
      return "degenerate";
  }
  return "degenerate";
}

void validate(const Dataset& data, const Family& family) {
  const Eigen::Index n = data.n();
  if (n == 0) throw ValidationError("dataset is empty");
  if (data.d() != family.dim)
    throw ValidationError("dataset dimension " + std::to_string(data.d()) +
                          " does not match family dimension " +
                          std::to_string(family.dim));
  if (data.upsilon.size() != n)
    throw ValidationError("upsilon size does not match number of observations");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(data.upsilon[i] > 0.0))
      throw ValidationError("upsilon[" + std::to_string(i) + "] must be > 0");
    if (!family.data_domain(data.points.row(i)))
      throw ValidationError("row " + std::to_string(i) + " violates the " +
                            family.name + " data domain");
  }
  if (std::abs(data.upsilon.sum() - 1.0) > 1e-12)
    throw ValidationError("upsilon must sum to 1");
}

void validate(const MixtureModel& model) {
  const Eigen::Index k = model.k();
  if (k == 0) throw ValidationError("model has no components");
  if (model.xis.rows() != k || model.xis.cols() != model.family.dim)
    throw ValidationError("model parameter matrix has the wrong shape");
  for (Eigen::Index j = 0; j < k; ++j) {
    if (model.omega[j] < 0.0)
      throw ValidationError("omega[" + std::to_string(j) + "] is negative");
    if (!model.family.expectation_domain(model.xis.row(j)))
      throw ValidationError("xi[" + std::to_string(j) +
                            "] violates the expectation domain");
  }
  if (std::abs(model.omega.sum() - 1.0) > 1e-12)
    throw ValidationError("omega must sum to 1");
}

double objective_from_cost(const TransportPlan& plan, const CostMatrix& gamma,
                           const RegularizerSpec& reg) {
  const Eigen::Index n = plan.pi.rows();
  const Eigen::Index k = plan.pi.cols();
  Vec partial(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double dot = 0.0;
    double phi = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double p = plan.pi(i, j);
      if (p > 0.0) dot += p * gamma.gamma(i, j);
      phi += reg.phi_value(p);
    }
    partial[i] = dot + reg.lambda * phi;
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += partial[i];
  return total;
}

double objective(const Family& family, const MixtureModel& model,
                 const Dataset& data, const TransportPlan& plan,
                 const RegularizerSpec& reg) {
  const Eigen::Index n = plan.pi.rows();
  const Eigen::Index k = plan.pi.cols();
  if (model.k() != k)
    throw ValidationError("objective: plan and model disagree on k");

  std::vector<NaturalParam> thetas(k);
  Vec log_omega(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const bool carried = plan.pi.col(j).maxCoeff() > 0.0;
    if (carried && !(model.omega[j] > 0.0))
      throw DegenerateFitError("objective: component " + std::to_string(j) +
                               " carries plan mass but has zero weight");
    if (model.omega[j] > 0.0) {
      thetas[j] = to_natural(family, ExpectationParam{model.xis.row(j)});
      log_omega[j] = std::log(model.omega[j]);
    } else {
      log_omega[j] = -std::numeric_limits<double>::infinity();
    }
  }

  Vec partial(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec x = data.points.row(i);
    double dot = 0.0;
    double phi = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double p = plan.pi(i, j);
      if (p > 0.0) dot -= p * (log_omega[j] + log_density(family, thetas[j], x));
      phi += reg.phi_value(p);
    }
    partial[i] = dot + reg.lambda * phi;
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += partial[i];
  return total;
}

Vec weight_update(const TransportPlan& plan) {
  const Eigen::Index n = plan.pi.rows();
  const Eigen::Index k = plan.pi.cols();
  Vec omega(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += plan.pi(i, j);
    omega[j] = s;
  }
  return omega;
}

Mat m_step(const Family& family, const TransportPlan& plan, const Vec& omega,
           const Dataset& data) {
  const Eigen::Index n = plan.pi.rows();
  const Eigen::Index k = plan.pi.cols();
  const Eigen::Index d = data.d();
  if (omega.size() != k)
    throw ValidationError("m_step: omega size does not match plan columns");
  for (Eigen::Index j = 0; j < k; ++j)
    if (!(omega[j] > 0.0))
      throw ValidationError("m_step: component " + std::to_string(j) +
                            " has zero weight; prune it first");

  Mat xis(k, d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < k; ++j) {
    Vec acc = Vec::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = plan.pi(i, j);
      if (p > 0.0) acc += p * data.points.row(i).transpose();
    }
    xis.row(j) = clamp_expectation(family, acc / omega[j]);
  }
  return xis;
}

namespace {

// Count distinct rows by exact value (lexicographic sort of row indices).
Eigen::Index count_distinct_rows(const Mat& points) {
  const Eigen::Index n = points.rows();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      if (points(a, c) < points(b, c)) return true;
      if (points(a, c) > points(b, c)) return false;
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  Eigen::Index distinct = n == 0 ? 0 : 1;
  for (Eigen::Index i = 1; i < n; ++i)
    if (less(idx[i - 1], idx[i])) ++distinct;
  return distinct;
}

MixtureModel model_from_centers(const Family& family,
                                const std::vector<Eigen::Index>& centers,
                                const Dataset& data) {
  const int k = static_cast<int>(centers.size());
  MixtureModel model;
  model.family = family;
  model.omega = Vec::Constant(k, 1.0 / k);
  model.xis.resize(k, data.d());
  for (int j = 0; j < k; ++j)
    model.xis.row(j) = clamp_expectation(family, data.points.row(centers[j]));
  return model;
}

void check_seedable(const Dataset& data, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (k > data.n())
    throw ValidationError("k = " + std::to_string(k) + " exceeds n = " +
                          std::to_string(data.n()));
  const Eigen::Index distinct = count_distinct_rows(data.points);
  if (k > distinct)
    throw ValidationError("k = " + std::to_string(k) +
                          " exceeds the number of distinct data points (" +
                          std::to_string(distinct) + ")");
}

}  // namespace

MixtureModel init_kmeanspp(const Family& family, const Dataset& data, int k,
                           std::uint64_t seed) {
  check_seedable(data, k);
  const Eigen::Index n = data.n();
  Rng rng(seed);

  std::vector<Eigen::Index> centers;
  centers.push_back(static_cast<Eigen::Index>(rng.below(n)));

  Vec min_div(n);
  auto update_min = [&](Eigen::Index center) {
    const ExpectationParam xi{clamp_expectation(family, data.points.row(center))};
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = dual_bregman_data_div(family, data.points.row(i), xi);
      if (centers.size() == 1 || d < min_div[i]) min_div[i] = d;
    }
  };
  update_min(centers.back());

  while (static_cast<int>(centers.size()) < k) {
    centers.push_back(rng.categorical(min_div));
    update_min(centers.back());
  }
  return model_from_centers(family, centers, data);
}

MixtureModel init_random_points(const Family& family, const Dataset& data, int k,
                                std::uint64_t seed) {
  check_seedable(data, k);
  const Eigen::Index n = data.n();
  Rng rng(seed);

  // partial Fisher-Yates over row indices, rejecting value duplicates
  std::vector<Eigen::Index> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<Eigen::Index> centers;
  std::size_t end = pool.size();
  while (static_cast<int>(centers.size()) < k) {
    const std::size_t pick = rng.below(end);
    const Eigen::Index candidate = pool[pick];
    std::swap(pool[pick], pool[--end]);
    const bool duplicate =
        std::any_of(centers.begin(), centers.end(), [&](Eigen::Index c) {
          return (data.points.row(c).array() == data.points.row(candidate).array())
              .all();
        });
    if (!duplicate) centers.push_back(candidate);
  }
  return model_from_centers(family, centers, data);
}

std::pair<MixtureModel, TransportPlan> prune(const MixtureModel& model,
                                             const TransportPlan& plan,
                                             double threshold) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < model.k(); ++j)
    if (model.omega[j] > threshold) keep.push_back(j);
  if (keep.empty())
    throw DegenerateFitError("prune: every component fell below the threshold");
  if (static_cast<Eigen::Index>(keep.size()) == model.k()) return {model, plan};

  MixtureModel out;
  out.family = model.family;
  out.omega.resize(keep.size());
  out.xis.resize(keep.size(), model.xis.cols());
  TransportPlan plan_out;
  plan_out.pi.resize(plan.pi.rows(), keep.size());
  plan_out.row_masses = plan.row_masses;
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.omega[c] = model.omega[keep[c]];
    out.xis.row(c) = model.xis.row(keep[c]);
    plan_out.pi.col(c) = plan.pi.col(keep[c]);
  }
  out.omega /= out.omega.sum();
  return {out, plan_out};
}

namespace {

TransportPlan run_estep(const CostMatrix& gamma, const Vec& upsilon,
                        const RegularizerSpec& reg) {
  switch (reg.kind) {
    case RegKind::none:
      return estep_hard(gamma, upsilon);
    case RegKind::entropic:
      return estep_entropic_from_cost(gamma, upsilon, reg.lambda);
    case RegKind::quadratic:
      return estep_quadratic(gamma, upsilon, reg.lambda);
  }
  return estep_hard(gamma, upsilon);
}

// Locate a component with a non-finite contribution for diagnostics.
std::string nonfinite_detail(const TransportPlan& plan, const CostMatrix& gamma,
                             int iteration) {
  for (Eigen::Index j = 0; j < plan.pi.cols(); ++j)
    for (Eigen::Index i = 0; i < plan.pi.rows(); ++i) {
      const double term = plan.pi(i, j) * gamma.gamma(i, j);
      if (plan.pi(i, j) > 0.0 && !std::isfinite(term))
        return "non-finite objective at iteration " + std::to_string(iteration) +
               ", component " + std::to_string(j);
    }
  return "non-finite objective at iteration " + std::to_string(iteration);
}

}  // namespace

FitResult fit_from(const Family& family, const Dataset& data,
                   const MixtureModel& initial, const FitConfig& config) {
  if (config.max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (!(config.rel_tol > 0.0)) throw ValidationError("rel_tol must be > 0");
  validate(data, family);
  validate(initial);
  const RegularizerSpec reg = RegularizerSpec::make(config.regularizer, config.lambda);
  const bool pruning = reg.kind != RegKind::entropic;

  MixtureModel model = initial;
  FitTrace trace;
  if (config.record_iterates) trace.initial_model = model;

  FitResult result;
  double prev_objective = std::numeric_limits<double>::quiet_NaN();
  for (int t = 1;; ++t) {
    const CostMatrix gamma = cost_matrix(family, model, data);
    TransportPlan plan = run_estep(gamma, data.upsilon, reg);
    const double obj = objective_from_cost(plan, gamma, reg);

    IterationRecord row;
    row.objective = obj;
    row.omega = model.omega;
    row.mean_row_entropy = mean_row_entropy(plan);
    row.k_active = static_cast<int>(model.k());
    trace.iterations.push_back(row);
    if (config.record_iterates) trace.plans.push_back(plan);

    if (!std::isfinite(obj)) {
      trace.status = FitStatus::degenerate;
      trace.status_detail = nonfinite_detail(plan, gamma, t);
      result.model = model;
      result.plan = std::move(plan);
      break;
    }
    if (t > 1 && std::abs(obj - prev_objective) <=
                     config.rel_tol * (1.0 + std::abs(prev_objective))) {
      trace.status = FitStatus::converged;
      result.model = model;
      result.plan = std::move(plan);
      break;
    }
    if (t > config.max_iters) {
      trace.status = FitStatus::max_iters;
      result.model = model;
      result.plan = std::move(plan);
      break;
    }
    prev_objective = obj;

    const Vec new_omega = weight_update(plan);
    bool lost_component = false;
    Eigen::Index lost = -1;
    for (Eigen::Index j = 0; j < new_omega.size(); ++j)
      if (!(new_omega[j] > 0.0)) {
        lost_component = true;
        lost = j;
        break;
      }
    if (lost_component && !pruning) {
      // entropic plans are strictly positive; reaching this means underflow
      trace.status = FitStatus::degenerate;
      trace.status_detail = "component " + std::to_string(lost) +
                            " lost all mass at iteration " + std::to_string(t);
      result.model = model;
      result.plan = std::move(plan);
      break;
    }
    model.omega = new_omega;
    if (pruning) std::tie(model, plan) = prune(model, plan, config.prune_threshold);
    model.xis = m_step(family, plan, model.omega, data);
    if (config.record_iterates) trace.models.push_back(model);
  }
  result.trace = std::move(trace);
  return result;
}

FitResult fit(const Family& family, const Dataset& data, int k,
              const FitConfig& config) {
  validate(data, family);
  const MixtureModel initial =
      config.init == InitMethod::kmeanspp
          ? init_kmeanspp(family, data, k, config.seed)
          : init_random_points(family, data, k, config.seed);
  return fit_from(family, data, initial, config);
}

}  // namespace rotmix
