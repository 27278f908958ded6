#pragma once

#include "aduwt/baselines.hpp"
#include "aduwt/core.hpp"
#include "aduwt/ingest.hpp"
#include "aduwt/models.hpp"
#include "aduwt/trimming.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace aduwt {

inline constexpr const char* kVersion = "aduwt 1.0.0";

/// Numerical slack on the eps-inequality; absorbs sum reassociation across
/// parallel loss evaluation.
inline constexpr double kGuaranteeSlack = 1e-9;

enum class Method { aduwt, duwt, sampling };
const char* to_string(Method m);

// ---------------------------------------------------------------------------
// Splitting and standardization

struct SplitResult {
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
  std::vector<std::size_t> test_indices;
};

/// Seeded disjoint-and-exhaustive partition. Sizes follow the largest-
/// remainder rule, so (0.6, 0.2, 0.2) on n = 10 gives exactly (6, 2, 2).
/// Stratified splits shuffle and apportion each class separately, keeping
/// class ratios within one point per class; stratification requires a
/// classification task and at least 3 members per class.
SplitResult split(const Dataset& ds, std::uint64_t seed,
                  const std::array<double, 3>& fractions, bool stratify);

struct StandardizeStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population; constant columns recorded as 1
};

struct StandardizeResult {
  Dataset train;
  std::vector<Dataset> others;
  StandardizeStats stats;
};

/// Per-feature z-score with train statistics only; the other datasets are
/// transformed with the train mean/std. Constant columns divide by 1.
StandardizeResult standardize(const Dataset& train, const std::vector<const Dataset*>& others);

// ---------------------------------------------------------------------------
// Guarantee metrics

SweepEvaluator::MaxRelError max_relative_error(const WeightedCoreset& coreset,
                                               const Dataset& ds, const ModelParams& params,
                                               ModelId model, const HypothesisSweep& sweep);

struct GuaranteeViolation {
  std::size_t hypothesis_index = 0;
  double rel_err = 0.0;
};

struct VerdictRecord {
  bool pass = false;
  double max_err = 0.0;
  std::size_t argmax_hypothesis = 0;
  std::vector<GuaranteeViolation> violations;  // every hypothesis beyond eps + slack
};

VerdictRecord guarantee_check(const WeightedCoreset& coreset, const Dataset& ds,
                              const ModelParams& params, ModelId model,
                              const HypothesisSweep& sweep, double eps);
/// Same check against an already-constructed evaluator (shares the memoized
/// full losses across methods).
VerdictRecord guarantee_check(const SweepEvaluator& eval, const WeightedCoreset& coreset,
                              double eps);

struct ConfInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap CI for the mean: seeded resamples with replacement,
/// linearly interpolated quantiles of the resample means.
ConfInterval bootstrap_ci(const std::vector<double>& values, std::size_t resamples,
                          double level, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Protocol configuration and report

struct BootstrapSpec {
  std::size_t resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
};

struct ProtocolConfig {
  ModelId model = ModelId::krr;
  double lambda = 1.0;
  double B = 1.0;
  double delta = 1.0;
  Kernel kernel = Kernel::linear();
  // Caps default to the tight observed values on the standardized train
  // split; explicit values override (loose caps remain valid inputs).
  std::optional<double> cap_R;
  std::optional<double> cap_Y;
  std::optional<double> cap_kappa;

  double eps = 0.1;
  SweepSpec sweep;
  std::uint64_t sweep_seed = 0;
  std::size_t repetitions = 1;
  std::array<double, 3> fractions = {0.6, 0.2, 0.2};
  bool stratify = false;
  std::uint64_t base_seed = 0;
  std::vector<Method> methods = {Method::aduwt, Method::duwt, Method::sampling};
  DuwtWeight duwt_weight = DuwtWeight::one_plus_eps;
  double sampling_constant = 0.05;
  std::size_t sampling_trials = 20;  // used by the comparison runner
  BootstrapSpec bootstrap;
  std::vector<double> delta_grid;
  std::vector<double> eps_grid;
  bool fit_enabled = false;
  FitSchedule fit;
  bool record_runtimes = false;  // leaving this false keeps reports byte-stable
  std::size_t threads = 1;

  void validate() const;  // throws ConfigError
};

struct MethodRecord {
  Method method = Method::aduwt;
  std::size_t coreset_size = 0;
  std::optional<std::size_t> sample_count;  // sampling only: requested k
  std::optional<double> t_u;                // trimming methods only
  std::optional<double> alpha;
  double max_rel_err = 0.0;
  std::size_t argmax_hypothesis = 0;
  bool guarantee_pass = false;
  std::vector<GuaranteeViolation> violations;
  double runtime_ms = 0.0;
};

struct FitRecord {
  double full_train_objective = 0.0;
  double coreset_train_objective = 0.0;
  double full_val_mean_loss = 0.0;
  double full_test_mean_loss = 0.0;
  double coreset_val_mean_loss = 0.0;
  double coreset_test_mean_loss = 0.0;
};

struct RepetitionRecord {
  std::size_t repetition = 0;  // 1-based
  std::uint64_t split_seed = 0;
  std::size_t train_n = 0, val_n = 0, test_n = 0;
  double cap_R = 0.0, cap_Y = 0.0, cap_kappa = 0.0;  // caps actually used
  double s_total = 0.0;
  std::optional<double> shi;
  std::vector<MethodRecord> methods;
  std::optional<FitRecord> fit;
  std::optional<std::string> error;  // set when the repetition failed
};

struct MethodAggregate {
  Method method = Method::aduwt;
  double err_mean = 0.0, err_sd = 0.0;
  double size_mean = 0.0, size_sd = 0.0;
  std::size_t guarantee_pass_count = 0;
  std::size_t record_count = 0;
  ConfInterval err_ci;
};

struct CurvePoint {
  double eps = 0.0;
  double size_mean = 0.0, size_sd = 0.0;
};

struct AblationRow {
  double delta = 0.0;
  double s_total_mean = 0.0;
  double size_mean = 0.0;
  double t_u_mean = 0.0;
  double alpha_mean = 0.0;
};

struct EvalReport {
  std::string version;
  ProtocolConfig config;
  std::vector<RepetitionRecord> records;
  std::vector<MethodAggregate> aggregates;
  std::vector<CurvePoint> size_vs_eps;
  std::vector<AblationRow> delta_ablation;
  std::vector<std::string> notes;
};

/// Runs the full protocol: per repetition r = 1..R, split -> standardize ->
/// oracle -> trim -> every configured method -> guarantee checks, then
/// aggregates, the |S|-vs-eps curve and the delta ablation. Failed
/// repetitions are recorded with their error, never dropped. Output is a
/// deterministic function of (config, dataset).
EvalReport run_protocol(const ProtocolConfig& config, const Dataset& ds);

/// Report serialization. Key order is fixed (documented in the README) and
/// floats use the shortest round-trip decimal form, so identical runs
/// serialize byte-identically.
nlohmann::ordered_json report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);
nlohmann::ordered_json config_to_json(const ProtocolConfig& config);

// ---------------------------------------------------------------------------
// Trim scaling measurement

struct ScalingRow {
  std::size_t n = 0;
  double millis = 0.0;
  std::optional<double> ratio;  // vs previous row
};

/// Best-of-`reps` wall time of trim() on seeded uniform bound vectors of
/// each size, with the ratio column for scaling assessment.
std::vector<ScalingRow> measure_trim_scaling(const std::vector<std::size_t>& sizes,
                                             std::uint64_t seed, double eps = 0.1,
                                             std::size_t reps = 5);

// ---------------------------------------------------------------------------
// CLI-facing configuration files

struct DatasetSpec {
  enum class Source { csv, synthetic };
  Source source = Source::synthetic;
  // csv
  std::string path;
  CsvSchema schema;
  // synthetic
  Task task = Task::regression;
  std::size_t n = 100, d = 2;
  std::uint64_t seed = 0;
  double noise_sd = 0.1;
  double heterogeneity = 0.0;
  double margin = 1.0;
};

Dataset load_dataset(const DatasetSpec& spec);
nlohmann::ordered_json dataset_spec_to_json(const DatasetSpec& spec);

struct RunSpec {
  ProtocolConfig protocol;
  DatasetSpec dataset;
  std::string report_path;  // JSON
  std::string csv_path;
};

/// Parses the JSON-shaped run configuration (documented in the README).
/// Throws ConfigError with the offending key on any problem.
RunSpec parse_run_spec(const nlohmann::ordered_json& j);
RunSpec load_run_spec(const std::string& path);

}  // namespace aduwt
