#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aduwt {

enum class Task { regression, binary_classification };
enum class ModelId { krr, logistic, svm };

const char* to_string(Task t);
const char* to_string(ModelId m);

/// Kernel used by KRR hypotheses. linear is the plain inner product,
/// rbf(gamma) is exp(-gamma * |x1 - x2|^2).
struct Kernel {
  enum class Kind { linear, rbf };
  Kind kind = Kind::linear;
  double gamma = 0.0;

  static Kernel linear() { return {Kind::linear, 0.0}; }
  static Kernel rbf(double gamma);
};

double kernel_eval(const Kernel& k, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2);

/// Raised when trimming would discard every point, leaving nothing to weight.
class EmptyCoresetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on malformed protocol configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One cap the data fails to satisfy: which point, which cap, by how much.
struct BoundViolation {
  std::size_t index = 0;
  std::string cap;  // "R", "Y" or "kappa"
  double observed = 0.0;
  double limit = 0.0;

  std::string message() const;
};

/// Raised by the sensitivity oracles when the dataset breaks the caps
/// their closed forms assume.
class BoundViolationError : public std::runtime_error {
 public:
  BoundViolationError(const std::string& what, std::vector<BoundViolation> violations);
  const std::vector<BoundViolation>& violations() const { return violations_; }

 private:
  std::vector<BoundViolation> violations_;
};

enum class LabelAlphabet { zero_one, pm_one };

/// Immutable sample set. Rows of features() are points x_i, labels() holds
/// y_i. The observed caps max_i |x_i| and max_i |y_i| are computed once at
/// construction and carried as metadata for oracle parameterization.
///
/// Classification labels must come from a single two-value alphabet,
/// either {0,1} or {-1,+1}.
class Dataset {
 public:
  static Dataset make(Eigen::MatrixXd features, Eigen::VectorXd labels, Task task);

  std::size_t n() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(features_.cols()); }
  Task task() const { return task_; }
  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXd& labels() const { return labels_; }
  Eigen::VectorXd point(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)).transpose(); }
  double label(std::size_t i) const { return labels_(static_cast<Eigen::Index>(i)); }

  /// max_i |x_i|, the tight observed feature-norm cap.
  double feature_norm_cap() const { return feature_norm_cap_; }
  /// max_i |y_i|, the tight observed label-magnitude cap.
  double label_cap() const { return label_cap_; }

 private:
  Dataset(Eigen::MatrixXd features, Eigen::VectorXd labels, Task task, double xcap, double ycap)
      : features_(std::move(features)), labels_(std::move(labels)), task_(task),
        feature_norm_cap_(xcap), label_cap_(ycap) {}

  Eigen::MatrixXd features_;
  Eigen::VectorXd labels_;
  Task task_;
  double feature_norm_cap_;
  double label_cap_;
};

/// Copy of a classification dataset with labels mapped into the target
/// alphabet (0 <-> -1). Labels already in the target alphabet pass through.
Dataset relabel(const Dataset& ds, LabelAlphabet target);

bool labels_in_alphabet(const Dataset& ds, LabelAlphabet alphabet);

/// Model-side constants the sensitivity bounds are built from. lambda is the
/// regularization weight, [delta, B] the admissible hypothesis-norm window,
/// and R / kappa / Y the data caps the closed forms assume.
struct ModelParams {
  double lambda = 1.0;
  double B = 1.0;
  double delta = 1.0;
  double R = 0.0;
  double kappa = 0.0;
  double Y = 0.0;
  Kernel kernel = Kernel::linear();

  /// Throws std::invalid_argument unless lambda > 0, 0 < delta <= B and the
  /// caps are nonnegative.
  void validate() const;
};

/// Target tolerance eps together with the derived trimming budget
/// eps' = 2*eps/(1+eps), chosen so (1 - eps')*(1 + eps) = 1 - eps.
struct EpsilonSchedule {
  double eps = 0.0;
  double eps_prime = 0.0;
};

/// Per-point sensitivity upper bounds with their aggregates. shi() is the
/// coefficient of variation sigma/mu of the bounds; it is undefined (nullopt)
/// when mu = 0 because 0/0 carries no diagnostic information.
class SensitivityProfile {
 public:
  static SensitivityProfile from_bounds(std::vector<double> bounds);

  const std::vector<double>& bounds() const { return bounds_; }
  std::size_t size() const { return bounds_.size(); }
  double total() const { return total_; }
  double mean() const { return mean_; }
  double stddev() const { return stddev_; }
  std::optional<double> shi() const { return shi_; }

 private:
  SensitivityProfile() = default;

  std::vector<double> bounds_;
  double total_ = 0.0;
  double mean_ = 0.0;
  double stddev_ = 0.0;  // population, divide by n
  std::optional<double> shi_;
};

/// Output of the trimming pass. kept/trimmed partition [0, n); t_u is the
/// sensitivity mass of the trimmed prefix and alpha the uniform weight
/// sqrt((1 - eps^2)/(1 - t_u)). permutation records the nondecreasing
/// (bound, index) order the prefix was taken from, for audit.
struct TrimResult {
  std::vector<std::size_t> kept;     // ascending original indices
  std::vector<std::size_t> trimmed;  // prefix of `permutation`
  std::size_t m = 0;                 // |trimmed|
  double t_u = 0.0;
  double alpha = 0.0;
  std::vector<std::size_t> permutation;
};

/// Kept indices plus the single uniform weight applied to each of them.
struct Coreset {
  std::vector<std::size_t> indices;
  double weight = 1.0;
};

/// Kept indices with one weight per index (importance sampling produces
/// non-uniform weights). Conversion from Coreset broadcasts the weight.
struct WeightedCoreset {
  std::vector<std::size_t> indices;
  std::vector<double> weights;

  WeightedCoreset() = default;
  WeightedCoreset(const Coreset& c)
      : indices(c.indices), weights(c.indices.size(), c.weight) {}
};

/// Reports every point violating the caps the model's oracle assumes:
/// |x_i| <= R for classification tasks, |y_i| <= Y and k(x_i, x_i) <= kappa^2
/// for regression. Empty result means the dataset is bound-consistent.
std::vector<BoundViolation> validate_bounds(const Dataset& ds, const ModelParams& params);

}  // namespace aduwt
