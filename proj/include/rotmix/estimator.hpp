#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotmix/transport.hpp"

namespace rotmix {

enum class InitMethod { kmeanspp, random_points };
enum class FitStatus { converged, max_iters, degenerate };

InitMethod init_method_from_string(const std::string& s);
std::string to_string(InitMethod m);
std::string to_string(FitStatus s);

struct FitConfig {
  double lambda = 1.0;
  RegKind regularizer = RegKind::entropic;
  int max_iters = 500;
  double rel_tol = 1e-8;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::kmeanspp;
  double prune_threshold = 1e-12;
  // Keep per-iteration models and plans in the trace (diagnostics/tests).
  bool record_iterates = false;
};

// One row per E-step evaluation. omega and k_active describe the model the
// E-step consumed, so the last row always matches the returned model.
struct IterationRecord {
  double objective = 0.0;
  Vec omega;
  double mean_row_entropy = 0.0;
  int k_active = 0;
};

struct FitTrace {
  std::vector<IterationRecord> iterations;
  FitStatus status = FitStatus::converged;
  std::string status_detail;

  // Filled only when FitConfig::record_iterates is set. plans[t] is the
  // E-step plan of iteration t+1; models[t] the state after that
  // iteration's weight and parameter updates.
  MixtureModel initial_model;
  std::vector<TransportPlan> plans;
  std::vector<MixtureModel> models;

  // Number of completed weight/parameter updates (one less than the number
  // of E-step evaluations).
  int updates() const { return static_cast<int>(iterations.size()) - 1; }
  double final_objective() const { return iterations.back().objective; }
};

struct FitResult {
  MixtureModel model;
  TransportPlan plan;  // E-step plan of the returned model
  FitTrace trace;
};

// Eq.-(12)-style objective: -sum_ij pi_ij log(omega_j p_{xi_j}(x_i))
// + lambda phi(pi), under the 0 log 0 = 0 convention. Components carrying
// positive plan mass must have positive weight.
double objective(const Family& family, const MixtureModel& model,
                 const Dataset& data, const TransportPlan& plan,
                 const RegularizerSpec& reg);

// Same value from a precomputed cost matrix (all omega_j > 0).
double objective_from_cost(const TransportPlan& plan, const CostMatrix& gamma,
                           const RegularizerSpec& reg);

// omega_j = sum_i pi_ij; sums to 1 because rows sum to upsilon.
Vec weight_update(const TransportPlan& plan);

// Weighted-mean parameter update: row j is sum_i (pi_ij / omega_j) x_i,
// clamped into the expectation interior. Requires omega_j > 0.
Mat m_step(const Family& family, const TransportPlan& plan, const Vec& omega,
           const Dataset& data);

// Greedy D^2-style seeding: first center uniform over data points, further
// centers sampled proportionally to the dual Bregman divergence to the
// nearest chosen center. Weights start uniform.
MixtureModel init_kmeanspp(const Family& family, const Dataset& data, int k,
                           std::uint64_t seed);

// k distinct data rows chosen uniformly without replacement.
MixtureModel init_random_points(const Family& family, const Dataset& data, int k,
                                std::uint64_t seed);

// Drop components whose weight is <= threshold, renormalize the remaining
// weights and remove the matching plan columns.
std::pair<MixtureModel, TransportPlan> prune(const MixtureModel& model,
                                             const TransportPlan& plan,
                                             double threshold = 1e-12);

// Alternating loop: E-step (dispatched on the regularizer), weight update,
// prune (hard/quadratic only), M-step; stops on relative objective change
// or max_iters.
FitResult fit(const Family& family, const Dataset& data, int k,
              const FitConfig& config);

// Same loop from an explicit starting model instead of seeding.
FitResult fit_from(const Family& family, const Dataset& data,
                   const MixtureModel& initial, const FitConfig& config);

}  // namespace rotmix
