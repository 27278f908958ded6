#include "aduwt/trimming.hpp"

#include "aduwt/rng.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

using namespace aduwt;

TEST_CASE("epsilon_schedule evaluates the budget formula") {
  const EpsilonSchedule s1 = epsilon_schedule(0.1);
  CHECK(s1.eps_prime == doctest::Approx(2.0 / 11.0).epsilon(1e-15));
  const EpsilonSchedule s2 = epsilon_schedule(0.5);
  CHECK(s2.eps_prime == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // budget vanishes with eps
  for (double eps : {1e-3, 1e-6, 1e-9}) {
    CHECK(epsilon_schedule(eps).eps_prime == doctest::Approx(2.0 * eps).epsilon(1e-3));
    CHECK(epsilon_schedule(eps).eps_prime < 2.0 * eps);
  }
  CHECK_THROWS_AS(epsilon_schedule(0.0), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_schedule(1.0), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_schedule(-0.2), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_schedule(1.7), std::invalid_argument);
}

TEST_CASE("trim keeps only the heavy point on the ten-light-one-heavy instance") {
  // ten 0.01 bounds and one 0.9, shuffled so the sort is exercised
  std::vector<double> bounds = {0.01, 0.01, 0.9, 0.01, 0.01, 0.01,
                                0.01, 0.01, 0.01, 0.01, 0.01};
  const EpsilonSchedule sched = epsilon_schedule(0.1);

  const testutil::BrutePrefix ref = testutil::brute_force_prefix(bounds, sched.eps_prime);
  REQUIRE(ref.m == 10);

  const SensitivityProfile p = SensitivityProfile::from_bounds(bounds);
  const TrimResult r = trim(p, sched);
  CHECK(r.m == 10);
  CHECK(r.t_u == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(r.t_u == doctest::Approx(ref.prefix_sum).epsilon(1e-15));
  REQUIRE(r.kept.size() == 1);
  CHECK(r.kept[0] == 2);  // the 0.9 entry
  const double expected_alpha = std::sqrt((1.0 - 0.01) / (1.0 - r.t_u));
  CHECK(r.alpha == doctest::Approx(expected_alpha).epsilon(1e-15));
  CHECK(r.alpha == doctest::Approx(1.0488088481701516).epsilon(1e-9));
}

TEST_CASE("trim keeps everything when every bound exceeds the budget") {
  const EpsilonSchedule sched = epsilon_schedule(0.1);
  const SensitivityProfile p = SensitivityProfile::from_bounds({1.0, 1.0, 1.0, 1.0, 1.0});
  const TrimResult r = trim(p, sched);
  CHECK(r.m == 0);
  CHECK(r.t_u == 0.0);
  CHECK(r.kept.size() == 5);
  CHECK(r.alpha == doctest::Approx(std::sqrt(1.0 - 0.01)).epsilon(1e-15));
}

TEST_CASE("trim refuses to trim away the whole dataset") {
  const EpsilonSchedule sched = epsilon_schedule(0.3);
  CHECK_THROWS_AS(trim(SensitivityProfile::from_bounds({0.0}), sched), EmptyCoresetError);
  CHECK_THROWS_WITH_AS(trim(SensitivityProfile::from_bounds({0.1, 0.1}), sched),
                       doctest::Contains("empty coreset"), EmptyCoresetError);
}

TEST_CASE("trim matches the exhaustive prefix search on random small instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(20);
    std::vector<double> bounds(n);
    for (double& b : bounds) {
      const double u = rng.uniform01();
      b = u < 0.2 ? 0.0 : (u < 0.6 ? 0.05 : rng.uniform01());  // ties and zeros on purpose
    }
    const double eps = rng.uniform(0.01, 0.99);
    const EpsilonSchedule sched = epsilon_schedule(eps);
    const testutil::BrutePrefix ref = testutil::brute_force_prefix(bounds, sched.eps_prime);

    const SensitivityProfile p = SensitivityProfile::from_bounds(bounds);
    if (ref.m == n) {
      CHECK_THROWS_AS(trim(p, sched), EmptyCoresetError);
      continue;
    }
    const TrimResult r = trim(p, sched);
    CHECK(r.m == ref.m);
    CHECK(r.t_u == doctest::Approx(ref.prefix_sum).epsilon(1e-15));
    CHECK(std::equal(r.trimmed.begin(), r.trimmed.end(), ref.order.begin()));

    // kept and trimmed partition [0, n)
    std::vector<std::size_t> all(r.kept);
    all.insert(all.end(), r.trimmed.begin(), r.trimmed.end());
    std::sort(all.begin(), all.end());
    bool is_partition = all.size() == n;
    for (std::size_t i = 0; i < all.size(); ++i) is_partition &= all[i] == i;
    CHECK(is_partition);
    CHECK(r.trimmed.size() == r.m);
    CHECK(r.alpha > 0.0);
  }
}

TEST_CASE("many trims on one shared profile agree across threads") {
  Rng rng(606);
  std::vector<double> bounds(500);
  for (double& b : bounds) b = rng.uniform01() * 0.01;
  const SensitivityProfile profile = SensitivityProfile::from_bounds(bounds);
  const EpsilonSchedule sched = epsilon_schedule(0.25);
  const TrimResult reference = trim(profile, sched);

  std::vector<TrimResult> results(8);
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < 8; ++t) {
    workers.emplace_back([&, t]() { results[t] = trim(profile, sched); });
  }
  for (auto& w : workers) w.join();
  for (const TrimResult& r : results) {
    CHECK(r.kept == reference.kept);
    CHECK(r.t_u == reference.t_u);
    CHECK(r.alpha == reference.alpha);
  }
}

TEST_CASE("trim selection is covariant under joint scaling of bounds and budget") {
  Rng rng(5);
  std::vector<double> bounds(40);
  for (double& b : bounds) b = rng.uniform01() * 0.05;
  const double budget = 0.3;
  const TrimSelection base = trim_selection(bounds, budget);
  for (double scale : {0.5, 2.0, 8.0}) {  // powers of two keep the sums exact
    std::vector<double> scaled = bounds;
    for (double& b : scaled) b *= scale;
    const TrimSelection s = trim_selection(scaled, budget * scale);
    CHECK(s.m == base.m);
    CHECK(s.permutation == base.permutation);
  }
}

TEST_CASE("equal bounds are trimmed in original index order") {
  std::vector<double> bounds = {0.05, 0.05, 0.05, 0.05, 0.05, 0.05};
  const TrimSelection sel = trim_selection(bounds, 0.12);
  CHECK(sel.m == 2);
  CHECK(sel.permutation == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});

  // repeated runs give identical output
  const EpsilonSchedule sched = epsilon_schedule(0.1);
  const SensitivityProfile p = SensitivityProfile::from_bounds(bounds);
  const TrimResult a = trim(p, sched);
  const TrimResult b = trim(p, sched);
  CHECK(a.kept == b.kept);
  CHECK(a.trimmed == b.trimmed);
  CHECK(a.alpha == b.alpha);
}

TEST_CASE("adaptive weight endpoints and monotonicity") {
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const double eps = rng.uniform(0.01, 0.99);
    const EpsilonSchedule sched = epsilon_schedule(eps);
    CHECK(std::abs(adaptive_weight(0.0, sched) - std::sqrt(1.0 - eps * eps)) <= 1e-12);
    CHECK(std::abs(adaptive_weight(sched.eps_prime, sched) - (1.0 + eps)) <= 1e-12);

    double prev = 0.0;
    for (int g = 0; g <= 64; ++g) {
      const double t = sched.eps_prime * static_cast<double>(g) / 64.0;
      const double a = adaptive_weight(t, sched);
      if (g > 0) CHECK(a > prev);  // strictly increasing in the trimmed mass
      prev = a;
    }
  }
  const EpsilonSchedule sched = epsilon_schedule(0.1);
  CHECK_THROWS_AS(adaptive_weight(-1e-9, sched), std::invalid_argument);
  CHECK_THROWS_AS(adaptive_weight(sched.eps_prime + 1e-9, sched), std::invalid_argument);
}

TEST_CASE("adaptive weight equals the geometric mean of the feasible endpoints") {
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const double eps = rng.uniform(0.01, 0.99);
    const EpsilonSchedule sched = epsilon_schedule(eps);
    const double t_u = rng.uniform01() * sched.eps_prime;
    const double direct = adaptive_weight(t_u, sched);
    const double geometric = std::sqrt(((1.0 - eps) / (1.0 - t_u)) * (1.0 + eps));
    CHECK(std::abs(direct - geometric) <= 1e-12);
  }
  const EpsilonSchedule sched = epsilon_schedule(0.1);
  CHECK(adaptive_weight(0.10, sched) == doctest::Approx(1.0488088481701516).epsilon(1e-12));
}

TEST_CASE("minimax gap evaluates both branches") {
  CHECK(minimax_gap(1.0, 0.0) == 0.0);
  CHECK(minimax_gap(1.1, 0.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(minimax_gap(0.9, 0.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(minimax_gap(1.0, 0.2) == doctest::Approx(0.2).epsilon(1e-15));
}

// The weight from the trim is the geometric mean of the feasible endpoints.
// It stays inside the eps envelope for every admissible kept-loss fraction
// and never does worse than the oblivious 1 + eps weight; the unconstrained
// minimizer of the gap function itself is the branch-crossing point
// 2 / (2 - t_u), which the grid search recovers.
TEST_CASE("gap function landscape around the adaptive weight") {
  Rng rng(13);
  for (int i = 0; i < 25; ++i) {
    const double eps = rng.uniform(0.05, 0.6);
    const EpsilonSchedule sched = epsilon_schedule(eps);
    const double t_u = rng.uniform01() * sched.eps_prime;
    const double a_star = adaptive_weight(t_u, sched);

    // envelope: within eps of 1 across the whole feasible fraction range
    CHECK(minimax_gap(a_star, t_u) <= eps + 1e-12);
    // never worse than the data-oblivious weight
    CHECK(minimax_gap(a_star, t_u) <= minimax_gap(1.0 + eps, t_u) + 1e-12);

    // grid search over [0.5, 2] finds the branch-crossing minimizer
    double best_alpha = 0.5, best_gap = minimax_gap(0.5, t_u);
    for (int g = 1; g <= 15000; ++g) {
      const double alpha = 0.5 + 1e-4 * static_cast<double>(g);
      const double gap = minimax_gap(alpha, t_u);
      if (gap < best_gap) {
        best_gap = gap;
        best_alpha = alpha;
      }
    }
    const double crossing = 2.0 / (2.0 - t_u);
    CHECK(best_alpha == doctest::Approx(crossing).epsilon(2e-4));
    CHECK(minimax_gap(crossing, t_u) <= minimax_gap(a_star, t_u) + 1e-12);
  }
}

TEST_CASE("build_coreset returns the kept set with the adaptive weight") {
  const EpsilonSchedule sched = epsilon_schedule(0.1);
  std::vector<double> bounds(11, 0.01);
  bounds[4] = 0.9;
  const Coreset c = build_coreset(SensitivityProfile::from_bounds(bounds), sched);
  REQUIRE(c.indices.size() == 1);
  CHECK(c.indices[0] == 4);
  CHECK(c.weight == doctest::Approx(1.0488088481701516).epsilon(1e-9));

  const Coreset all = build_coreset(SensitivityProfile::from_bounds({1, 1, 1, 1, 1}), sched);
  CHECK(all.indices == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(all.weight == doctest::Approx(std::sqrt(0.99)).epsilon(1e-15));

  const Coreset single = build_coreset(SensitivityProfile::from_bounds({0.5}), sched);
  CHECK(single.indices == std::vector<std::size_t>{0});
  CHECK(single.weight == doctest::Approx(std::sqrt(0.99)).epsilon(1e-15));

  CHECK_THROWS_AS(build_coreset(SensitivityProfile::from_bounds({0.0}), sched), EmptyCoresetError);
}

TEST_CASE("shi reads the profile diagnostics") {
  CHECK(*shi(SensitivityProfile::from_bounds({3.0, 3.0, 3.0, 3.0})) == 0.0);
  CHECK_FALSE(shi(SensitivityProfile::from_bounds({0.0, 0.0, 0.0})).has_value());
  CHECK(*shi(SensitivityProfile::from_bounds({1.0, 3.0})) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("sampling size estimate") {
  const EpsilonSchedule e01 = epsilon_schedule(0.1);
  const EpsilonSchedule e02 = epsilon_schedule(0.2);
  const SensitivityProfile unit = SensitivityProfile::from_bounds({0.25, 0.25, 0.25, 0.25});
  CHECK(sampling_size_estimate(unit, e01, 1.0).k == 100);

  const SensitivityProfile zero = SensitivityProfile::from_bounds({0.0, 0.0});
  CHECK(sampling_size_estimate(zero, e01, 1.0).k == 1);  // clamped floor

  const SensitivityProfile s237 = SensitivityProfile::from_bounds({2.37});
  CHECK(sampling_size_estimate(s237, e02, 1.0).k == 60);  // ceil(59.25)

  CHECK_THROWS_AS(sampling_size_estimate(unit, e01, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sampling_size_estimate(unit, e01, -2.0), std::invalid_argument);
}

TEST_CASE("tail diagnostic") {
  const EpsilonSchedule sched = epsilon_schedule(0.1);

  std::vector<double> bounds(100, 0.001);
  for (std::size_t i = 90; i < 100; ++i) bounds[i] = 0.5;
  const SensitivityProfile p = SensitivityProfile::from_bounds(bounds);

  const TailDiagnostic d = tail_diagnostic(p, sched, 0.001);
  CHECK(d.rho == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(d.feasible);  // 0.9 * 0.001 * 100 = 0.09 <= 2/11
  REQUIRE(d.projected_keep_fraction.has_value());
  CHECK(*d.projected_keep_fraction == doctest::Approx(0.1).epsilon(1e-12));

  const TailDiagnostic zero = tail_diagnostic(p, sched, 0.0);
  CHECK(zero.rho == 0.0);
  CHECK(zero.feasible);
  CHECK(*zero.projected_keep_fraction == 1.0);

  const TailDiagnostic sat = tail_diagnostic(p, sched, 0.5);
  CHECK(sat.rho == 1.0);
  CHECK_FALSE(sat.feasible);  // 1 * 0.5 * 100 = 50 > eps'
  CHECK_FALSE(sat.projected_keep_fraction.has_value());

  CHECK_THROWS_AS(tail_diagnostic(p, sched, -0.1), std::invalid_argument);
}
