#include "aduwt/oracles.hpp"

#include <cmath>

namespace aduwt {

namespace {

void require_bound_consistent(const Dataset& ds, const ModelParams& params,
                              const char* oracle) {
  std::vector<BoundViolation> v = validate_bounds(ds, params);
  if (!v.empty()) {
    const std::string what =
        std::string(oracle) + ": dataset violates " + std::to_string(v.size()) + " cap(s)";
    throw BoundViolationError(what, std::move(v));
  }
}

void require_labels(const Dataset& ds, LabelAlphabet alphabet, const char* oracle) {
  if (ds.task() != Task::binary_classification)
    throw std::invalid_argument(std::string(oracle) + " requires a classification dataset");
  if (!labels_in_alphabet(ds, alphabet)) {
    throw std::invalid_argument(std::string(oracle) + " requires labels in " +
                                (alphabet == LabelAlphabet::zero_one ? "{0,1}" : "{-1,+1}"));
  }
}

}  // namespace

SensitivityProfile krr_oracle(const Dataset& ds, const ModelParams& params) {
  params.validate();
  if (ds.task() != Task::regression)
    throw std::invalid_argument("krr oracle requires a regression dataset");
  require_bound_consistent(ds, params, "krr oracle");

  const double n = static_cast<double>(ds.n());
  const double b = (2.0 * (params.Y * params.Y + params.B * params.B * params.kappa * params.kappa) +
                    (params.lambda / n) * params.B * params.B) /
                   (params.lambda * params.delta * params.delta);
  const double label_sq_sum = ds.labels().squaredNorm();

  std::vector<double> bounds(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double a = label_sq_sum > 0.0 ? ds.label(i) * ds.label(i) / label_sq_sum : 0.0;
    bounds[i] = std::max(a, b);
  }
  return SensitivityProfile::from_bounds(std::move(bounds));
}

SensitivityProfile logistic_oracle(const Dataset& ds, const ModelParams& params) {
  params.validate();
  require_labels(ds, LabelAlphabet::zero_one, "logistic oracle");
  require_bound_consistent(ds, params, "logistic oracle");

  const double n = static_cast<double>(ds.n());
  const double s = (softplus(params.B * params.R) + (params.lambda / n) * params.B * params.B) /
                   (params.lambda * params.delta * params.delta);
  return SensitivityProfile::from_bounds(std::vector<double>(ds.n(), s));
}

SensitivityProfile svm_oracle(const Dataset& ds, const ModelParams& params) {
  params.validate();
  require_labels(ds, LabelAlphabet::pm_one, "svm oracle");
  require_bound_consistent(ds, params, "svm oracle");

  const double n = static_cast<double>(ds.n());
  const double s = (1.0 + params.B * params.R + (params.lambda / n) * params.B * params.B) /
                   (params.lambda * params.delta * params.delta);
  return SensitivityProfile::from_bounds(std::vector<double>(ds.n(), s));
}

SensitivityProfile oracle_for(ModelId model, const Dataset& ds, const ModelParams& params) {
  switch (model) {
    case ModelId::krr: return krr_oracle(ds, params);
    case ModelId::logistic: return logistic_oracle(ds, params);
    case ModelId::svm: return svm_oracle(ds, params);
  }
  throw std::invalid_argument("unknown model");
}

std::vector<double> empirical_sensitivity(const Dataset& ds, const ModelParams& params,
                                          const HypothesisSweep& sweep, ModelId model) {
  if (sweep.hypotheses.empty())
    throw std::invalid_argument("empirical sensitivity requires a nonempty sweep");
  for (const Hypothesis& h : sweep.hypotheses) {
    if (h.norm < params.delta - 1e-9 || h.norm > params.B + 1e-9)
      throw std::invalid_argument("sweep hypothesis outside the norm window [delta, B]");
  }

  SweepEvaluator eval(ds, params, model, sweep);
  std::vector<double> out(ds.n(), 0.0);
  // Max over hypotheses is order-independent, so a sequential pass keeps
  // results identical under any evaluation schedule.
  for (std::size_t hi = 0; hi < sweep.hypotheses.size(); ++hi) {
    const Eigen::VectorXd losses = eval.per_point_losses(hi);
    const double full = losses.sum();
    if (full == 0.0)
      throw std::invalid_argument("empirical sensitivity: L(f; D) = 0 within the sweep");
    for (Eigen::Index i = 0; i < losses.size(); ++i) {
      out[static_cast<std::size_t>(i)] =
          std::max(out[static_cast<std::size_t>(i)], losses(i) / full);
    }
  }
  return out;
}

}  // namespace aduwt
