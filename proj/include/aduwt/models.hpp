#pragma once

#include "aduwt/core.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace aduwt {

/// A point in the hypothesis space. Linear-space models hold the parameter
/// vector directly; KRR with a non-linear kernel holds representer
/// coefficients over a shared anchor set, with the Hilbert norm
/// sqrt(c^T K c) fixed at construction.
struct Hypothesis {
  Eigen::VectorXd coef;
  std::shared_ptr<const Eigen::MatrixXd> anchors;  // null => coef is w itself
  Kernel kernel = Kernel::linear();
  double norm = 0.0;

  static Hypothesis linear(Eigen::VectorXd w);
  static Hypothesis representer(Eigen::VectorXd c,
                                std::shared_ptr<const Eigen::MatrixXd> anchors,
                                const Kernel& kernel);

  bool is_representer() const { return anchors != nullptr; }
  double predict(const Eigen::VectorXd& x) const;
};

struct SweepSpec {
  std::size_t num_directions = 64;
  std::size_t num_radii = 16;
};

/// Finite probe of the hypothesis annulus {delta <= |w| <= B}: every radius
/// grid includes both endpoints, and regeneration from (seed, spec) is
/// bit-identical.
struct HypothesisSweep {
  std::vector<Hypothesis> hypotheses;
  std::uint64_t seed = 0;
  SweepSpec spec;
};

/// Annulus sweep in R^d: the d canonical axes, then seeded random unit
/// directions up to num_directions, each scaled by a geometric radius grid
/// from delta to B inclusive.
HypothesisSweep make_sweep(const ModelParams& params, std::size_t d,
                           std::size_t num_directions, std::size_t num_radii,
                           std::uint64_t seed);

/// Representer-form sweep for KRR with a non-linear kernel: coefficient
/// vectors over a seeded subset of at most max_anchors training points,
/// normalized to unit Hilbert norm and scaled into [delta, B].
HypothesisSweep make_sweep_rbf(const ModelParams& params, const Dataset& ds,
                               std::size_t num_directions, std::size_t num_radii,
                               std::uint64_t seed, std::size_t max_anchors = 64);

/// Dispatches to the representer sweep for KRR with an rbf kernel, the
/// plain annulus sweep otherwise.
HypothesisSweep make_sweep_for(ModelId model, const ModelParams& params,
                               const Dataset& ds, const SweepSpec& spec,
                               std::uint64_t seed);

Eigen::MatrixXd gram_matrix(const Kernel& k, const Eigen::MatrixXd& points);

// Per-point regularized losses. Each includes the (lambda/n) |w|^2 share so
// the full-dataset sum carries exactly lambda |w|^2 of regularization.
double krr_point_loss(const Hypothesis& h, const Eigen::VectorXd& x, double y,
                      const ModelParams& params, std::size_t n);
double logistic_point_loss(const Hypothesis& h, const Eigen::VectorXd& x, double y,
                           const ModelParams& params, std::size_t n);
double svm_point_loss(const Hypothesis& h, const Eigen::VectorXd& x, double y,
                      const ModelParams& params, std::size_t n);
double point_loss(ModelId model, const Hypothesis& h, const Eigen::VectorXd& x,
                  double y, const ModelParams& params, std::size_t n);

/// log(1 + e^t) without overflow: t + log1p(e^-t) for t > 0.
double softplus(double t);

double total_loss(const Hypothesis& h, const Dataset& ds, const ModelParams& params,
                  ModelId model);
double weighted_loss(const Hypothesis& h, const WeightedCoreset& coreset,
                     const Dataset& ds, const ModelParams& params, ModelId model);

/// Full, kept and weighted losses for one hypothesis against one coreset.
struct LossEval {
  double full = 0.0;
  double kept = 0.0;
  double weighted = 0.0;
};
LossEval evaluate_losses(const Hypothesis& h, const WeightedCoreset& coreset,
                         const Dataset& ds, const ModelParams& params, ModelId model);

/// Batch loss evaluation over a fixed (dataset, model, sweep) triple.
/// Per-hypothesis predictions go through one matrix-vector product (the
/// cross-kernel block is built once for representer sweeps), and the
/// full-dataset losses are memoized so every weighting scheme checked
/// against the same sweep reuses them.
class SweepEvaluator {
 public:
  SweepEvaluator(const Dataset& ds, const ModelParams& params, ModelId model,
                 const HypothesisSweep& sweep);

  std::size_t sweep_size() const { return sweep_->hypotheses.size(); }
  const Dataset& dataset() const { return *ds_; }

  /// L(f; D) per hypothesis, computed once.
  const std::vector<double>& full_losses() const;

  /// Per-point losses of one hypothesis over the whole dataset.
  Eigen::VectorXd per_point_losses(std::size_t hyp_index) const;

  /// Sum of weights[j] * loss(point indices[j]) per hypothesis.
  std::vector<double> weighted_subset_losses(const std::vector<std::size_t>& indices,
                                             const std::vector<double>& weights) const;

  /// max over the sweep of |L_hat(f) - L(f)| / L(f), with the maximizing
  /// hypothesis index for audit. Throws if some L(f) = 0 (a sweep that
  /// respects the annulus cannot produce one).
  struct MaxRelError {
    double err = 0.0;
    std::size_t hypothesis_index = 0;
  };
  MaxRelError max_relative_error(const WeightedCoreset& coreset) const;

 private:
  Eigen::VectorXd predictions(std::size_t hyp_index, const Eigen::MatrixXd& feat,
                              const Eigen::MatrixXd* cross) const;
  double loss_from_prediction(double pred, double y, double reg) const;

  const Dataset* ds_;
  ModelParams params_;
  ModelId model_;
  const HypothesisSweep* sweep_;
  Eigen::MatrixXd cross_kernel_;  // n x anchors, representer sweeps only
  bool has_cross_ = false;
  mutable std::vector<double> full_losses_;
  mutable bool full_ready_ = false;
};

/// Plain projected subgradient descent with the fixed schedule
/// step0 / (1 + t), iterates clamped into the norm window [delta, B].
/// Demonstration fitter only; linear hypothesis space.
struct FitSchedule {
  std::size_t steps = 200;
  double step0 = 0.1;
};
Hypothesis fit_gradient_descent(ModelId model, const Dataset& ds,
                                const WeightedCoreset& coreset,
                                const ModelParams& params, const FitSchedule& schedule);
Hypothesis fit_gradient_descent(ModelId model, const Dataset& ds,
                                const ModelParams& params, const FitSchedule& schedule);

}  // namespace aduwt
