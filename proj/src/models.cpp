#include "aduwt/models.hpp"

#include "aduwt/parallel.hpp"
#include "aduwt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aduwt {

Hypothesis Hypothesis::linear(Eigen::VectorXd w) {
  Hypothesis h;
  h.norm = w.norm();
  h.coef = std::move(w);
  return h;
}

Hypothesis Hypothesis::representer(Eigen::VectorXd c,
                                   std::shared_ptr<const Eigen::MatrixXd> anchors,
                                   const Kernel& kernel) {
  if (!anchors) throw std::invalid_argument("representer hypothesis requires anchors");
  if (c.size() != anchors->rows())
    throw std::invalid_argument("representer coefficients do not match anchor count");
  Hypothesis h;
  const Eigen::MatrixXd K = gram_matrix(kernel, *anchors);
  const double sq = c.dot(K * c);
  h.norm = std::sqrt(std::max(0.0, sq));
  h.coef = std::move(c);
  h.anchors = std::move(anchors);
  h.kernel = kernel;
  return h;
}

double Hypothesis::predict(const Eigen::VectorXd& x) const {
  if (!is_representer()) return coef.dot(x);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < anchors->rows(); ++j) {
    acc += coef(j) * kernel_eval(kernel, anchors->row(j).transpose(), x);
  }
  return acc;
}

Eigen::MatrixXd gram_matrix(const Kernel& k, const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel_eval(k, points.row(i).transpose(), points.row(j).transpose());
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

namespace {

// Geometric grid from delta to B with exact endpoints.
std::vector<double> radius_grid(double delta, double B, std::size_t num_radii) {
  std::vector<double> radii(num_radii);
  radii.front() = delta;
  radii.back() = B;
  const double ratio = B / delta;
  for (std::size_t i = 1; i + 1 < num_radii; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(num_radii - 1);
    radii[i] = delta * std::pow(ratio, t);
  }
  return radii;
}

void check_sweep_args(const ModelParams& params, std::size_t num_directions,
                      std::size_t num_radii) {
  if (!(params.delta > 0.0) || params.delta > params.B)
    throw std::invalid_argument("sweep requires 0 < delta <= B");
  if (num_directions < 1) throw std::invalid_argument("sweep requires num_directions >= 1");
  if (num_radii < 2) throw std::invalid_argument("sweep requires num_radii >= 2");
}

}  // namespace

HypothesisSweep make_sweep(const ModelParams& params, std::size_t d,
                           std::size_t num_directions, std::size_t num_radii,
                           std::uint64_t seed) {
  check_sweep_args(params, num_directions, num_radii);
  if (d < 1) throw std::invalid_argument("sweep requires d >= 1");

  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(num_directions);
  for (std::size_t j = 0; j < std::min(d, num_directions); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    e(static_cast<Eigen::Index>(j)) = 1.0;
    dirs.push_back(std::move(e));
  }
  Rng rng(seed);
  while (dirs.size() < num_directions) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    const double nrm = v.norm();
    if (nrm < 1e-12) continue;
    dirs.push_back(v / nrm);
  }

  const std::vector<double> radii = radius_grid(params.delta, params.B, num_radii);
  HypothesisSweep sweep;
  sweep.seed = seed;
  sweep.spec = {num_directions, num_radii};
  sweep.hypotheses.reserve(dirs.size() * radii.size());
  for (const auto& u : dirs) {
    for (double r : radii) {
      sweep.hypotheses.push_back(Hypothesis::linear(r * u));
    }
  }
  return sweep;
}

HypothesisSweep make_sweep_rbf(const ModelParams& params, const Dataset& ds,
                               std::size_t num_directions, std::size_t num_radii,
                               std::uint64_t seed, std::size_t max_anchors) {
  check_sweep_args(params, num_directions, num_radii);
  if (params.kernel.kind != Kernel::Kind::rbf)
    throw std::invalid_argument("representer sweep is for rbf kernels");

  // Seeded anchor subset, kept in ascending index order.
  const std::size_t m = std::min(max_anchors, ds.n());
  std::vector<std::size_t> all(ds.n());
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::swap(all[i], all[i + rng.uniform_index(ds.n() - i)]);
  }
  std::vector<std::size_t> anchor_idx(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(anchor_idx.begin(), anchor_idx.end());

  auto anchors = std::make_shared<Eigen::MatrixXd>(static_cast<Eigen::Index>(m), ds.features().cols());
  for (std::size_t i = 0; i < m; ++i) {
    anchors->row(static_cast<Eigen::Index>(i)) = ds.features().row(static_cast<Eigen::Index>(anchor_idx[i]));
  }
  const Eigen::MatrixXd K = gram_matrix(params.kernel, *anchors);

  std::vector<Eigen::VectorXd> dirs;  // unit Hilbert norm coefficient vectors
  dirs.reserve(num_directions);
  for (std::size_t j = 0; j < std::min(m, num_directions); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    // k(a_j, a_j) = 1 for rbf, so axis coefficients already have unit norm.
    e(static_cast<Eigen::Index>(j)) = 1.0;
    dirs.push_back(std::move(e));
  }
  while (dirs.size() < num_directions) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.normal();
    const double sq = c.dot(K * c);
    if (sq < 1e-12) continue;
    dirs.push_back(c / std::sqrt(sq));
  }

  const std::vector<double> radii = radius_grid(params.delta, params.B, num_radii);
  HypothesisSweep sweep;
  sweep.seed = seed;
  sweep.spec = {num_directions, num_radii};
  sweep.hypotheses.reserve(dirs.size() * radii.size());
  for (const auto& u : dirs) {
    for (double r : radii) {
      sweep.hypotheses.push_back(Hypothesis::representer(r * u, anchors, params.kernel));
    }
  }
  return sweep;
}

HypothesisSweep make_sweep_for(ModelId model, const ModelParams& params,
                               const Dataset& ds, const SweepSpec& spec,
                               std::uint64_t seed) {
  if (model == ModelId::krr && params.kernel.kind == Kernel::Kind::rbf) {
    return make_sweep_rbf(params, ds, spec.num_directions, spec.num_radii, seed);
  }
  return make_sweep(params, ds.d(), spec.num_directions, spec.num_radii, seed);
}

double krr_point_loss(const Hypothesis& h, const Eigen::VectorXd& x, double y,
                      const ModelParams& params, std::size_t n) {
  const double resid = y - h.predict(x);
  return resid * resid + (params.lambda / static_cast<double>(n)) * h.norm * h.norm;
}

double logistic_point_loss(const Hypothesis& h, const Eigen::VectorXd& x, double y,
                           const ModelParams& params, std::size_t n) {
  // Cross-entropy via softplus(-(2y-1) w.x); never evaluates log(0).
  const double margin = h.predict(x);
  const double sign = 2.0 * y - 1.0;
  return softplus(-sign * margin) + (params.lambda / static_cast<double>(n)) * h.norm * h.norm;
}

double svm_point_loss(const Hypothesis& h, const Eigen::VectorXd& x, double y,
                      const ModelParams& params, std::size_t n) {
  const double hinge = std::max(0.0, 1.0 - y * h.predict(x));
  return hinge + (params.lambda / static_cast<double>(n)) * h.norm * h.norm;
}

double point_loss(ModelId model, const Hypothesis& h, const Eigen::VectorXd& x,
                  double y, const ModelParams& params, std::size_t n) {
  switch (model) {
    case ModelId::krr: return krr_point_loss(h, x, y, params, n);
    case ModelId::logistic: return logistic_point_loss(h, x, y, params, n);
    case ModelId::svm: return svm_point_loss(h, x, y, params, n);
  }
  throw std::invalid_argument("unknown model");
}

double total_loss(const Hypothesis& h, const Dataset& ds, const ModelParams& params,
                  ModelId model) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    acc += point_loss(model, h, ds.point(i), ds.label(i), params, ds.n());
  }
  return acc;
}

double weighted_loss(const Hypothesis& h, const WeightedCoreset& coreset,
                     const Dataset& ds, const ModelParams& params, ModelId model) {
  if (coreset.indices.size() != coreset.weights.size())
    throw std::invalid_argument("weighted coreset: index/weight length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < coreset.indices.size(); ++j) {
    const std::size_t i = coreset.indices[j];
    if (i >= ds.n()) throw std::invalid_argument("coreset index out of range");
    acc += coreset.weights[j] * point_loss(model, h, ds.point(i), ds.label(i), params, ds.n());
  }
  return acc;
}

LossEval evaluate_losses(const Hypothesis& h, const WeightedCoreset& coreset,
                         const Dataset& ds, const ModelParams& params, ModelId model) {
  LossEval e;
  e.full = total_loss(h, ds, params, model);
  for (std::size_t j = 0; j < coreset.indices.size(); ++j) {
    const double l = point_loss(model, h, ds.point(coreset.indices[j]),
                                ds.label(coreset.indices[j]), params, ds.n());
    e.kept += l;
    e.weighted += coreset.weights[j] * l;
  }
  return e;
}

SweepEvaluator::SweepEvaluator(const Dataset& ds, const ModelParams& params,
                               ModelId model, const HypothesisSweep& sweep)
    : ds_(&ds), params_(params), model_(model), sweep_(&sweep) {
  if (sweep.hypotheses.empty()) throw std::invalid_argument("sweep must be nonempty");
  const Hypothesis& h0 = sweep.hypotheses.front();
  if (h0.is_representer()) {
    // One cross-kernel block serves every hypothesis in the sweep.
    const Eigen::MatrixXd& A = *h0.anchors;
    cross_kernel_.resize(ds.features().rows(), A.rows());
    for (Eigen::Index i = 0; i < ds.features().rows(); ++i) {
      for (Eigen::Index j = 0; j < A.rows(); ++j) {
        cross_kernel_(i, j) =
            kernel_eval(h0.kernel, ds.features().row(i).transpose(), A.row(j).transpose());
      }
    }
    has_cross_ = true;
  }
}

Eigen::VectorXd SweepEvaluator::predictions(std::size_t hyp_index,
                                            const Eigen::MatrixXd& feat,
                                            const Eigen::MatrixXd* cross) const {
  const Hypothesis& h = sweep_->hypotheses[hyp_index];
  if (h.is_representer()) return *cross * h.coef;
  return feat * h.coef;
}

double SweepEvaluator::loss_from_prediction(double pred, double y, double reg) const {
  switch (model_) {
    case ModelId::krr: {
      const double r = y - pred;
      return r * r + reg;
    }
    case ModelId::logistic:
      return softplus(-(2.0 * y - 1.0) * pred) + reg;
    case ModelId::svm:
      return std::max(0.0, 1.0 - y * pred) + reg;
  }
  return 0.0;
}

const std::vector<double>& SweepEvaluator::full_losses() const {
  if (full_ready_) return full_losses_;
  const std::size_t m = sweep_->hypotheses.size();
  full_losses_.assign(m, 0.0);
  const double lam_over_n = params_.lambda / static_cast<double>(ds_->n());
  parallel_for(m, [&](std::size_t hi) {
    const Hypothesis& h = sweep_->hypotheses[hi];
    const double reg = lam_over_n * h.norm * h.norm;
    const Eigen::VectorXd pred = predictions(hi, ds_->features(), has_cross_ ? &cross_kernel_ : nullptr);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      acc += loss_from_prediction(pred(i), ds_->labels()(i), reg);
    }
    full_losses_[hi] = acc;
  });
  full_ready_ = true;
  return full_losses_;
}

Eigen::VectorXd SweepEvaluator::per_point_losses(std::size_t hyp_index) const {
  const Hypothesis& h = sweep_->hypotheses[hyp_index];
  const double reg = params_.lambda / static_cast<double>(ds_->n()) * h.norm * h.norm;
  const Eigen::VectorXd pred =
      predictions(hyp_index, ds_->features(), has_cross_ ? &cross_kernel_ : nullptr);
  Eigen::VectorXd out(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    out(i) = loss_from_prediction(pred(i), ds_->labels()(i), reg);
  }
  return out;
}

std::vector<double> SweepEvaluator::weighted_subset_losses(
    const std::vector<std::size_t>& indices, const std::vector<double>& weights) const {
  if (indices.size() != weights.size())
    throw std::invalid_argument("subset losses: index/weight length mismatch");
  const std::size_t s = indices.size();
  Eigen::MatrixXd feat(static_cast<Eigen::Index>(s), ds_->features().cols());
  Eigen::MatrixXd cross;
  if (has_cross_) cross.resize(static_cast<Eigen::Index>(s), cross_kernel_.cols());
  Eigen::VectorXd ys(static_cast<Eigen::Index>(s));
  for (std::size_t j = 0; j < s; ++j) {
    const std::size_t i = indices[j];
    if (i >= ds_->n()) throw std::invalid_argument("coreset index out of range");
    feat.row(static_cast<Eigen::Index>(j)) = ds_->features().row(static_cast<Eigen::Index>(i));
    if (has_cross_) cross.row(static_cast<Eigen::Index>(j)) = cross_kernel_.row(static_cast<Eigen::Index>(i));
    ys(static_cast<Eigen::Index>(j)) = ds_->label(i);
  }

  const std::size_t m = sweep_->hypotheses.size();
  std::vector<double> out(m, 0.0);
  const double lam_over_n = params_.lambda / static_cast<double>(ds_->n());
  parallel_for(m, [&](std::size_t hi) {
    const Hypothesis& h = sweep_->hypotheses[hi];
    const double reg = lam_over_n * h.norm * h.norm;
    const Eigen::VectorXd pred = predictions(hi, feat, has_cross_ ? &cross : nullptr);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < pred.size(); ++j) {
      acc += weights[static_cast<std::size_t>(j)] * loss_from_prediction(pred(j), ys(j), reg);
    }
    out[hi] = acc;
  });
  return out;
}

SweepEvaluator::MaxRelError SweepEvaluator::max_relative_error(
    const WeightedCoreset& coreset) const {
  const std::vector<double>& full = full_losses();
  const std::vector<double> weighted = weighted_subset_losses(coreset.indices, coreset.weights);
  MaxRelError best;
  for (std::size_t hi = 0; hi < full.size(); ++hi) {
    if (full[hi] == 0.0)
      throw std::runtime_error("max_relative_error: L(f; D) = 0 in the sweep");
    const double err = std::abs(weighted[hi] - full[hi]) / full[hi];
    if (err > best.err || hi == 0) {
      best.err = err;
      best.hypothesis_index = hi;
    }
  }
  return best;
}

namespace {

Eigen::VectorXd clamp_to_annulus(Eigen::VectorXd w, double delta, double B) {
  const double nrm = w.norm();
  if (nrm < 1e-300) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(w.size());
    e(0) = delta;
    return e;
  }
  if (nrm > B) return w * (B / nrm);
  if (nrm < delta) return w * (delta / nrm);
  return w;
}

}  // namespace

Hypothesis fit_gradient_descent(ModelId model, const Dataset& ds,
                                const WeightedCoreset& coreset,
                                const ModelParams& params, const FitSchedule& schedule) {
  if (model == ModelId::krr && params.kernel.kind != Kernel::Kind::linear)
    throw std::invalid_argument("gradient fitter supports the linear hypothesis space only");
  const std::size_t n = ds.n();
  const Eigen::Index d = ds.features().cols();

  double weight_total = 0.0;
  for (double w : coreset.weights) weight_total += w;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  w(0) = 0.5 * (params.delta + params.B);
  for (std::size_t t = 0; t < schedule.steps; ++t) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
    for (std::size_t j = 0; j < coreset.indices.size(); ++j) {
      const std::size_t i = coreset.indices[j];
      const double cw = coreset.weights[j];
      const Eigen::VectorXd x = ds.point(i);
      const double y = ds.label(i);
      const double margin = w.dot(x);
      switch (model) {
        case ModelId::krr:
          grad += cw * (-2.0 * (y - margin)) * x;
          break;
        case ModelId::logistic: {
          const double p = 1.0 / (1.0 + std::exp(-margin));
          grad += cw * (p - y) * x;
          break;
        }
        case ModelId::svm:
          if (y * margin < 1.0) grad += cw * (-y) * x;
          break;
      }
    }
    grad += (2.0 * params.lambda / static_cast<double>(n)) * weight_total * w;
    const double step = schedule.step0 / (1.0 + static_cast<double>(t));
    w = clamp_to_annulus(w - step * grad, params.delta, params.B);
  }
  return Hypothesis::linear(std::move(w));
}

Hypothesis fit_gradient_descent(ModelId model, const Dataset& ds,
                                const ModelParams& params, const FitSchedule& schedule) {
  WeightedCoreset all;
  all.indices.resize(ds.n());
  std::iota(all.indices.begin(), all.indices.end(), std::size_t{0});
  all.weights.assign(ds.n(), 1.0);
  return fit_gradient_descent(model, ds, all, params, schedule);
}

}  // namespace aduwt
