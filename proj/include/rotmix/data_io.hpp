#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rotmix/estimator.hpp"

namespace rotmix {

// A CSV of observations: one row per point, comma separated, '.' decimal
// point, optional single header row. weight_column selects the empirical
// weights by header name or 0-based index; ignore_columns (header names)
// are skipped, e.g. a `label` sidecar written by the sampler.
struct ObservationFile {
  std::filesystem::path path;
  bool has_header = false;
  std::optional<std::string> weight_column;
  std::vector<std::string> ignore_columns;
};

Dataset load_csv(const ObservationFile& file, const Family& family);

struct SampleResult {
  Dataset data;
  std::vector<int> labels;  // 0-based component of each draw
};

// Two-stage mixture draw: component j ~ omega, then x ~ p_{xi_j}.
// Weights come out uniform; labels are kept for evaluation only.
SampleResult sample_mixture(const MixtureModel& model, Eigen::Index n,
                            std::uint64_t seed);

// Fitted-model file: fixed field order, reals at 17 significant digits so
// save -> load -> save is byte-identical.
struct ModelDocument {
  std::string family_name;
  int dim = 0;
  int k = 0;
  double lambda = 0.0;
  RegKind regularizer = RegKind::none;
  std::string init;
  std::uint64_t seed = 0;
  int max_iters = 0;
  double rel_tol = 0.0;
  double prune_threshold = 0.0;
  std::string status;
  int iterations = 0;
  double final_objective = 0.0;
  Vec omega;
  Mat xis;
};

ModelDocument make_document(const MixtureModel& model, const FitConfig& config,
                            const FitTrace& trace);
void save_model(const ModelDocument& doc, const std::filesystem::path& path);
ModelDocument load_model(const std::filesystem::path& path);
MixtureModel model_from_document(const ModelDocument& doc);

// CSV emitters (atomic: write temp file, then rename).
void write_samples_csv(const std::filesystem::path& path, const SampleResult& sample,
                       bool with_labels);
void write_trace_csv(const std::filesystem::path& path, const FitTrace& trace);
void write_plan_csv(const std::filesystem::path& path, const TransportPlan& plan);

// Shortest-width decimal with 17 significant digits (round-trip exact).
std::string fmt_g17(double v);

void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace rotmix
