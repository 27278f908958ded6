#include "aduwt/baselines.hpp"

#include "aduwt/oracles.hpp"
#include "aduwt/parallel.hpp"
#include "aduwt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace aduwt {

SamplingPlan make_sampling_plan(const SensitivityProfile& profile, std::size_t k,
                                std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("sampling plan requires k >= 1");
  if (!(profile.total() > 0.0))
    throw std::invalid_argument("sampling plan requires positive total bound mass");
  SamplingPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.probabilities.resize(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) {
    plan.probabilities[i] = profile.bounds()[i] / profile.total();
  }
  return plan;
}

Coreset duwt_coreset(const SensitivityProfile& profile, const EpsilonSchedule& sched,
                     DuwtWeight weight_rule) {
  TrimResult r = trim(profile, sched);
  const double weight = weight_rule == DuwtWeight::one_plus_eps
                            ? 1.0 + sched.eps
                            : static_cast<double>(profile.size()) /
                                  static_cast<double>(r.kept.size());
  return Coreset{std::move(r.kept), weight};
}

WeightedCoreset importance_sample(const SensitivityProfile& profile, std::size_t k,
                                  std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("importance sampling requires k >= 1");
  const double total = profile.total();
  if (!(total > 0.0))
    throw std::invalid_argument("importance sampling requires positive total bound mass");

  // Inverse-CDF draws on the raw bound masses; cumulative array built once.
  std::vector<double> cum(profile.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    acc += profile.bounds()[i];
    cum[i] = acc;
  }

  Rng rng(seed);
  std::map<std::size_t, std::size_t> multiplicity;
  for (std::size_t draw = 0; draw < k; ++draw) {
    const double u = rng.uniform01() * total;
    const std::size_t i = static_cast<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    multiplicity[std::min(i, profile.size() - 1)] += 1;
  }

  WeightedCoreset out;
  out.indices.reserve(multiplicity.size());
  out.weights.reserve(multiplicity.size());
  const double kd = static_cast<double>(k);
  for (const auto& [idx, count] : multiplicity) {
    const double p = profile.bounds()[idx] / total;
    out.indices.push_back(idx);
    out.weights.push_back(static_cast<double>(count) / (kd * p));
  }
  return out;
}

ViolationReport violation_rate(const Dataset& ds, const ModelParams& params,
                               ModelId model, const EpsilonSchedule& sched,
                               std::size_t k, const HypothesisSweep& sweep,
                               std::size_t trials, std::uint64_t base_seed) {
  if (trials < 1) throw std::invalid_argument("violation rate requires trials >= 1");
  const SensitivityProfile profile = oracle_for(model, ds, params);
  SweepEvaluator eval(ds, params, model, sweep);
  eval.full_losses();  // materialize before the trial loop so trials share it

  std::vector<double> errs(trials, 0.0);
  parallel_for(trials, [&](std::size_t t) {
    const WeightedCoreset sample =
        importance_sample(profile, k, base_seed + static_cast<std::uint64_t>(t));
    errs[t] = eval.max_relative_error(sample).err;
  });

  ViolationReport rep;
  std::size_t violations = 0;
  for (double e : errs) {
    rep.worst_error = std::max(rep.worst_error, e);
    if (e > sched.eps) ++violations;
  }
  rep.rate = static_cast<double>(violations) / static_cast<double>(trials);
  return rep;
}

}  // namespace aduwt
