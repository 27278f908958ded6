#pragma once

#include "aduwt/core.hpp"
#include "aduwt/models.hpp"
#include "aduwt/trimming.hpp"

#include <cstdint>

namespace aduwt {

/// Weight rule for the data-oblivious variant. one_plus_eps is the minimax
/// choice when only T_U <= eps' is known; count_ratio reweights by n/|S|.
enum class DuwtWeight { one_plus_eps, count_ratio };

/// Importance-sampling draw plan: p_i = bound_i / total mass.
struct SamplingPlan {
  std::size_t k = 1;
  std::vector<double> probabilities;
  std::uint64_t seed = 0;
};

SamplingPlan make_sampling_plan(const SensitivityProfile& profile, std::size_t k,
                                std::uint64_t seed);

/// Same kept set as the adaptive trim, but the weight ignores the realized
/// trimmed mass. Defaults to 1 + eps.
Coreset duwt_coreset(const SensitivityProfile& profile, const EpsilonSchedule& sched,
                     DuwtWeight weight_rule = DuwtWeight::one_plus_eps);

/// k independent draws with replacement from p_i = bound_i / total, each
/// carrying weight 1/(k p_i); repeated draws accumulate. The weighted loss
/// is an unbiased estimator of L(f; D) for every fixed f. Deterministic
/// given (profile, k, seed).
WeightedCoreset importance_sample(const SensitivityProfile& profile, std::size_t k,
                                  std::uint64_t seed);

/// Fraction of sampling trials whose max relative error over the sweep
/// exceeds eps, plus the worst error seen. Trial t draws with seed
/// base_seed + t, so the whole experiment is reproducible.
struct ViolationReport {
  double rate = 0.0;
  double worst_error = 0.0;
};
ViolationReport violation_rate(const Dataset& ds, const ModelParams& params,
                               ModelId model, const EpsilonSchedule& sched,
                               std::size_t k, const HypothesisSweep& sweep,
                               std::size_t trials, std::uint64_t base_seed);

}  // namespace aduwt
