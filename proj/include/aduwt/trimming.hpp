#pragma once

#include "aduwt/core.hpp"

#include <cstdint>
#include <optional>

namespace aduwt {

/// Empirical-CDF probe of the low-sensitivity tail: rho is the fraction of
/// bounds <= t0, and trimming that tail is feasible when rho * t0 * n fits
/// inside the budget eps'.
struct TailDiagnostic {
  double t0 = 0.0;
  double rho = 0.0;
  bool feasible = false;
  std::optional<double> projected_keep_fraction;  // 1 - rho, set when feasible
};

/// Estimated sample count k = ceil(c * S_total / eps^2) a sensitivity
/// sampler would need. Diagnostic only: the Theta(.) it comes from hides
/// constants and log factors, c is the caller's guess at them.
struct SamplingEstimate {
  std::size_t k = 1;
  double constant = 1.0;
};

/// Builds the schedule for a target tolerance eps in (0,1).
EpsilonSchedule epsilon_schedule(double eps);

/// Core selection rule, exposed for scale-covariance checks: indices sorted
/// by (bound, index) ascending, then the longest prefix whose sum stays
/// <= budget. Returns the full sort order, the prefix length m and the
/// prefix sum.
struct TrimSelection {
  std::vector<std::size_t> permutation;
  std::size_t m = 0;
  double prefix_sum = 0.0;
};
TrimSelection trim_selection(const std::vector<double>& bounds, double budget);

/// Trims the maximal low-sensitivity prefix within eps' and attaches the
/// adaptive uniform weight sqrt((1 - eps^2)/(1 - T_U)). Throws
/// EmptyCoresetError if the prefix would consume all n points.
TrimResult trim(const SensitivityProfile& profile, const EpsilonSchedule& sched);

/// The weight sqrt((1 - eps^2)/(1 - t_u)), the geometric mean of the
/// admissible endpoints (1 - eps)/(1 - t_u) and 1 + eps. Rejects t_u
/// outside [0, eps'].
double adaptive_weight(double t_u, const EpsilonSchedule& sched);

/// Worst-case weighting gap max{1 - alpha*(1 - t_u), alpha - 1}: the largest
/// deviation of alpha * x from 1 as the kept-loss fraction x ranges over
/// [1 - t_u, 1].
double minimax_gap(double alpha, double t_u);

/// trim() reduced to its coreset: kept indices plus the uniform weight.
Coreset build_coreset(const SensitivityProfile& profile, const EpsilonSchedule& sched);

/// Sensitivity Heterogeneity Index sigma/mu of the profile's bounds;
/// nullopt when mu = 0.
std::optional<double> shi(const SensitivityProfile& profile);

SamplingEstimate sampling_size_estimate(const SensitivityProfile& profile,
                                        const EpsilonSchedule& sched, double c);

TailDiagnostic tail_diagnostic(const SensitivityProfile& profile,
                               const EpsilonSchedule& sched, double t0);

}  // namespace aduwt
