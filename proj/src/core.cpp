#include "aduwt/core.hpp"

#include <cmath>
#include <sstream>

namespace aduwt {

const char* to_string(Task t) {
  return t == Task::regression ? "regression" : "binary-classification";
}

const char* to_string(ModelId m) {
  switch (m) {
    case ModelId::krr: return "krr";
    case ModelId::logistic: return "logistic";
    case ModelId::svm: return "svm";
  }
  return "?";
}

Kernel Kernel::rbf(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("rbf kernel requires gamma > 0");
  return {Kind::rbf, gamma};
}

double kernel_eval(const Kernel& k, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) {
  if (x1.size() != x2.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
  switch (k.kind) {
    case Kernel::Kind::linear: return x1.dot(x2);
    case Kernel::Kind::rbf: return std::exp(-k.gamma * (x1 - x2).squaredNorm());
  }
  return 0.0;
}

std::string BoundViolation::message() const {
  std::ostringstream os;
  os << "point " << index << ": ";
  if (cap == "R") {
    os << "|x| = " << observed << " exceeds R = " << limit;
  } else if (cap == "Y") {
    os << "|y| = " << observed << " exceeds Y = " << limit;
  } else {
    os << "k(x,x) = " << observed << " exceeds kappa^2 = " << limit;
  }
  return os.str();
}

BoundViolationError::BoundViolationError(const std::string& what,
                                         std::vector<BoundViolation> violations)
    : std::runtime_error(what), violations_(std::move(violations)) {}

Dataset Dataset::make(Eigen::MatrixXd features, Eigen::VectorXd labels, Task task) {
  const Eigen::Index n = features.rows();
  if (n < 1) throw std::invalid_argument("dataset requires n >= 1");
  if (features.cols() < 1) throw std::invalid_argument("dataset requires d >= 1");
  if (labels.size() != n) throw std::invalid_argument("dataset: label count does not match point count");
  if (!features.allFinite() || !labels.allFinite())
    throw std::invalid_argument("dataset: non-finite feature or label value");

  if (task == Task::binary_classification) {
    bool saw_zero = false, saw_neg = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = labels(i);
      if (y == 0.0) saw_zero = true;
      else if (y == -1.0) saw_neg = true;
      else if (y != 1.0)
        throw std::invalid_argument("classification labels must come from {0,1} or {-1,+1}");
    }
    if (saw_zero && saw_neg)
      throw std::invalid_argument("classification labels mix the {0,1} and {-1,+1} alphabets");
  }

  double xcap = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) xcap = std::max(xcap, features.row(i).norm());
  const double ycap = labels.cwiseAbs().maxCoeff();
  return Dataset(std::move(features), std::move(labels), task, xcap, ycap);
}

bool labels_in_alphabet(const Dataset& ds, LabelAlphabet alphabet) {
  const double lo = alphabet == LabelAlphabet::zero_one ? 0.0 : -1.0;
  for (Eigen::Index i = 0; i < ds.labels().size(); ++i) {
    const double y = ds.labels()(i);
    if (y != lo && y != 1.0) return false;
  }
  return true;
}

Dataset relabel(const Dataset& ds, LabelAlphabet target) {
  if (ds.task() != Task::binary_classification)
    throw std::invalid_argument("relabel applies to classification datasets only");
  Eigen::VectorXd y = ds.labels();
  const double from = target == LabelAlphabet::zero_one ? -1.0 : 0.0;
  const double to = target == LabelAlphabet::zero_one ? 0.0 : -1.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == from) y(i) = to;
  }
  return Dataset::make(ds.features(), std::move(y), ds.task());
}

void ModelParams::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(delta > 0.0) || !(delta <= B)) throw std::invalid_argument("delta must satisfy 0 < delta <= B");
  if (R < 0.0 || kappa < 0.0 || Y < 0.0) throw std::invalid_argument("caps R, kappa, Y must be >= 0");
  if (kernel.kind == Kernel::Kind::rbf && !(kernel.gamma > 0.0))
    throw std::invalid_argument("rbf kernel requires gamma > 0");
}

SensitivityProfile SensitivityProfile::from_bounds(std::vector<double> bounds) {
  if (bounds.empty()) throw std::invalid_argument("sensitivity profile requires at least one bound");
  double total = 0.0;
  for (double b : bounds) {
    if (!(b >= 0.0)) throw std::invalid_argument("sensitivity bounds must be nonnegative");
    total += b;
  }
  const double n = static_cast<double>(bounds.size());
  const double mean = total / n;
  double ss = 0.0;
  for (double b : bounds) ss += (b - mean) * (b - mean);
  const double stddev = std::sqrt(ss / n);

  SensitivityProfile p;
  p.bounds_ = std::move(bounds);
  p.total_ = total;
  p.mean_ = mean;
  p.stddev_ = stddev;
  if (mean > 0.0) p.shi_ = stddev / mean;
  return p;
}

std::vector<BoundViolation> validate_bounds(const Dataset& ds, const ModelParams& params) {
  std::vector<BoundViolation> out;
  const std::size_t n = ds.n();
  if (ds.task() == Task::binary_classification) {
    for (std::size_t i = 0; i < n; ++i) {
      const double nrm = ds.features().row(static_cast<Eigen::Index>(i)).norm();
      if (nrm > params.R) out.push_back({i, "R", nrm, params.R});
    }
  } else {
    const double kappa_sq = params.kappa * params.kappa;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = std::abs(ds.label(i));
      if (y > params.Y) out.push_back({i, "Y", y, params.Y});
      // Compared in the norm domain with the same expression the attached
      // caps come from, so a cap set to the observed maximum always passes.
      const double diag_norm = params.kernel.kind == Kernel::Kind::rbf
                                   ? 1.0
                                   : ds.features().row(static_cast<Eigen::Index>(i)).norm();
      if (diag_norm > params.kappa) {
        out.push_back({i, "kappa", diag_norm * diag_norm, kappa_sq});
      }
    }
  }
  return out;
}

}  // namespace aduwt
