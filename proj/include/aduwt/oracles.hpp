#pragma once

#include "aduwt/core.hpp"
#include "aduwt/models.hpp"

namespace aduwt {

/// Closed-form sensitivity upper bounds, valid over the hypothesis annulus
/// {delta <= |w| <= B} (the annulus floor is what makes the lambda*delta^2
/// denominators legitimate: L(f; D) >= lambda |w|^2 >= lambda delta^2).
/// Bounds are deliberately not clamped to <= 1; loose bounds only shrink
/// the trimmed prefix.

/// KRR: s_i = max{ y_i^2 / sum_j y_j^2, (2(Y^2 + B^2 kappa^2) + (lambda/n) B^2) / (lambda delta^2) },
/// with the first term 0 when all labels are zero.
SensitivityProfile krr_oracle(const Dataset& ds, const ModelParams& params);

/// Logistic: every point gets (log(1 + e^{BR}) + (lambda/n) B^2) / (lambda delta^2),
/// evaluated with the overflow-safe softplus.
SensitivityProfile logistic_oracle(const Dataset& ds, const ModelParams& params);

/// SVM: every point gets (1 + BR + (lambda/n) B^2) / (lambda delta^2).
SensitivityProfile svm_oracle(const Dataset& ds, const ModelParams& params);

SensitivityProfile oracle_for(ModelId model, const Dataset& ds, const ModelParams& params);

/// Finite-sweep lower bound on the true sensitivities: for each point the
/// max over the sweep of loss(f; z_i) / L(f; D). Every closed-form oracle
/// value must dominate this. Fails if some L(f; D) = 0, which the annulus
/// restriction rules out.
std::vector<double> empirical_sensitivity(const Dataset& ds, const ModelParams& params,
                                          const HypothesisSweep& sweep, ModelId model);

}  // namespace aduwt
