#include "aduwt/trimming.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace aduwt {

EpsilonSchedule epsilon_schedule(double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("eps must lie in (0, 1)");
  return {eps, 2.0 * eps / (1.0 + eps)};
}

TrimSelection trim_selection(const std::vector<double>& bounds, double budget) {
  // (bound, index) ascending: equal bounds keep original order, so the
  // selection is a pure function of the input. Sorting value/index pairs
  // instead of a permutation keeps the comparisons cache-local at large n.
  std::vector<std::pair<double, std::size_t>> keyed(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) keyed[i] = {bounds[i], i};
  std::sort(keyed.begin(), keyed.end());

  TrimSelection sel;
  sel.permutation.resize(bounds.size());
  double acc = 0.0;
  std::size_t m = 0;
  bool fits = true;
  for (std::size_t j = 0; j < keyed.size(); ++j) {
    sel.permutation[j] = keyed[j].second;
    if (fits) {
      const double next = acc + keyed[j].first;
      if (next > budget) {
        fits = false;  // prefix sums are nondecreasing, no longer prefix fits
      } else {
        acc = next;
        m = j + 1;
      }
    }
  }
  sel.m = m;
  sel.prefix_sum = acc;
  return sel;
}

TrimResult trim(const SensitivityProfile& profile, const EpsilonSchedule& sched) {
  const std::vector<double>& bounds = profile.bounds();
  TrimSelection sel = trim_selection(bounds, sched.eps_prime);
  if (sel.m == bounds.size()) {
    throw EmptyCoresetError(
        "empty coreset: the trimming budget consumes all " +
        std::to_string(bounds.size()) + " points (total bound mass " +
        std::to_string(profile.total()) + " <= eps' = " +
        std::to_string(sched.eps_prime) + ")");
  }

  TrimResult r;
  r.permutation = std::move(sel.permutation);
  r.m = sel.m;
  r.t_u = sel.prefix_sum;
  r.trimmed.assign(r.permutation.begin(), r.permutation.begin() + static_cast<std::ptrdiff_t>(r.m));
  r.kept.reserve(bounds.size() - r.m);
  std::vector<bool> is_trimmed(bounds.size(), false);
  for (std::size_t i : r.trimmed) is_trimmed[i] = true;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!is_trimmed[i]) r.kept.push_back(i);
  }
  r.alpha = adaptive_weight(r.t_u, sched);
  return r;
}

double adaptive_weight(double t_u, const EpsilonSchedule& sched) {
  if (!(t_u >= 0.0) || t_u > sched.eps_prime)
    throw std::invalid_argument("t_u must lie in [0, eps']");
  return std::sqrt((1.0 - sched.eps * sched.eps) / (1.0 - t_u));
}

double minimax_gap(double alpha, double t_u) {
  return std::max(1.0 - alpha * (1.0 - t_u), alpha - 1.0);
}

Coreset build_coreset(const SensitivityProfile& profile, const EpsilonSchedule& sched) {
  TrimResult r = trim(profile, sched);
  return Coreset{std::move(r.kept), r.alpha};
}

std::optional<double> shi(const SensitivityProfile& profile) { return profile.shi(); }

SamplingEstimate sampling_size_estimate(const SensitivityProfile& profile,
                                        const EpsilonSchedule& sched, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("sampling estimate constant must be > 0");
  const double raw = c * profile.total() / (sched.eps * sched.eps);
  const double k = std::ceil(raw);
  SamplingEstimate est;
  est.constant = c;
  est.k = k < 1.0 ? 1 : static_cast<std::size_t>(k);
  return est;
}

TailDiagnostic tail_diagnostic(const SensitivityProfile& profile,
                               const EpsilonSchedule& sched, double t0) {
  if (!(t0 >= 0.0)) throw std::invalid_argument("t0 must be >= 0");
  TailDiagnostic d;
  d.t0 = t0;
  const std::size_t n = profile.size();
  std::size_t count = 0;
  for (double b : profile.bounds()) {
    if (b <= t0) ++count;
  }
  d.rho = static_cast<double>(count) / static_cast<double>(n);
  d.feasible = d.rho * t0 * static_cast<double>(n) <= sched.eps_prime;
  if (d.feasible) d.projected_keep_fraction = 1.0 - d.rho;
  return d;
}

}  // namespace aduwt
