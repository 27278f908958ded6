#include "aduwt/harness.hpp"

#include "aduwt/format.hpp"
#include "aduwt/oracles.hpp"
#include "aduwt/parallel.hpp"
#include "aduwt/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace aduwt {

const char* to_string(Method m) {
  switch (m) {
    case Method::aduwt: return "aduwt";
    case Method::duwt: return "duwt";
    case Method::sampling: return "sampling";
  }
  return "?";
}

namespace {

Dataset subset_dataset(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), ds.features().cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    X.row(static_cast<Eigen::Index>(j)) = ds.features().row(static_cast<Eigen::Index>(idx[j]));
    y(static_cast<Eigen::Index>(j)) = ds.label(idx[j]);
  }
  return Dataset::make(std::move(X), std::move(y), ds.task());
}

// Largest-remainder apportionment of n into three parts.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& fractions) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * fractions[i];
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    used += sizes[i];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return a < b;
  });
  for (std::size_t j = 0; used + j < n; ++j) sizes[order[j]] += 1;
  return sizes;
}

void check_fractions(const std::array<double, 3>& fractions) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw std::invalid_argument("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
}

// Splits one index group into the three parts after a seeded shuffle.
void apportion_group(std::vector<std::size_t>& group, Rng& rng,
                     const std::array<double, 3>& fractions,
                     std::array<std::vector<std::size_t>, 3>& parts) {
  rng.shuffle(group);
  const std::array<std::size_t, 3> sizes = apportion(group.size(), fractions);
  std::size_t pos = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t j = 0; j < sizes[p]; ++j) parts[p].push_back(group[pos++]);
  }
}

double population_sd(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled) {
    if (enabled_) start_ = std::chrono::steady_clock::now();
  }
  double elapsed_ms() const {
    if (!enabled_) return 0.0;
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(now - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SplitResult split(const Dataset& ds, std::uint64_t seed,
                  const std::array<double, 3>& fractions, bool stratify) {
  check_fractions(fractions);
  if (stratify && ds.task() != Task::binary_classification)
    throw std::invalid_argument("stratified split requires a classification task");

  Rng rng(seed);
  std::array<std::vector<std::size_t>, 3> parts;
  if (!stratify) {
    std::vector<std::size_t> idx(ds.n());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    apportion_group(idx, rng, fractions, parts);
  } else {
    // Classes processed in ascending label order for determinism.
    std::vector<double> classes = {ds.labels().minCoeff(), ds.labels().maxCoeff()};
    if (classes[0] == classes[1]) classes.pop_back();
    for (double cls : classes) {
      std::vector<std::size_t> group;
      for (std::size_t i = 0; i < ds.n(); ++i) {
        if (ds.label(i) == cls) group.push_back(i);
      }
      if (group.size() < 3) {
        throw std::invalid_argument("stratified split: class " + fmt_double(cls) + " has " +
                                    std::to_string(group.size()) + " members, need >= 3");
      }
      apportion_group(group, rng, fractions, parts);
    }
  }

  for (auto& part : parts) std::sort(part.begin(), part.end());
  for (std::size_t p = 0; p < 3; ++p) {
    if (parts[p].empty()) {
      throw std::invalid_argument("split produces an empty part (n too small for fractions)");
    }
  }
  return SplitResult{subset_dataset(ds, parts[0]), subset_dataset(ds, parts[1]),
                     subset_dataset(ds, parts[2]), std::move(parts[0]), std::move(parts[1]),
                     std::move(parts[2])};
}

StandardizeResult standardize(const Dataset& train, const std::vector<const Dataset*>& others) {
  const Eigen::Index d = train.features().cols();
  const double n = static_cast<double>(train.n());
  Eigen::VectorXd mean(d), sd(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    mean(j) = train.features().col(j).mean();
    const double var = (train.features().col(j).array() - mean(j)).square().sum() / n;
    const double s = std::sqrt(var);
    sd(j) = s > 0.0 ? s : 1.0;  // constant columns map to zero, not inf
  }

  auto transform = [&](const Dataset& ds) {
    Eigen::MatrixXd X = ds.features();
    for (Eigen::Index j = 0; j < d; ++j) {
      X.col(j) = (X.col(j).array() - mean(j)) / sd(j);
    }
    return Dataset::make(std::move(X), ds.labels(), ds.task());
  };

  StandardizeResult out{transform(train), {}, {mean, sd}};
  out.others.reserve(others.size());
  for (const Dataset* ds : others) out.others.push_back(transform(*ds));
  return out;
}

SweepEvaluator::MaxRelError max_relative_error(const WeightedCoreset& coreset,
                                               const Dataset& ds, const ModelParams& params,
                                               ModelId model, const HypothesisSweep& sweep) {
  SweepEvaluator eval(ds, params, model, sweep);
  return eval.max_relative_error(coreset);
}

VerdictRecord guarantee_check(const SweepEvaluator& eval, const WeightedCoreset& coreset,
                              double eps) {
  const std::vector<double>& full = eval.full_losses();
  const std::vector<double> weighted = eval.weighted_subset_losses(coreset.indices, coreset.weights);
  VerdictRecord v;
  for (std::size_t hi = 0; hi < full.size(); ++hi) {
    if (full[hi] == 0.0) throw std::runtime_error("guarantee check: L(f; D) = 0 in the sweep");
    const double err = std::abs(weighted[hi] - full[hi]) / full[hi];
    if (err > v.max_err || hi == 0) {
      v.max_err = err;
      v.argmax_hypothesis = hi;
    }
    if (err > eps + kGuaranteeSlack) v.violations.push_back({hi, err});
  }
  v.pass = v.violations.empty();
  return v;
}

VerdictRecord guarantee_check(const WeightedCoreset& coreset, const Dataset& ds,
                              const ModelParams& params, ModelId model,
                              const HypothesisSweep& sweep, double eps) {
  SweepEvaluator eval(ds, params, model, sweep);
  return guarantee_check(eval, coreset, eps);
}

ConfInterval bootstrap_ci(const std::vector<double>& values, std::size_t resamples,
                          double level, std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("bootstrap_ci requires nonempty values");
  if (!(level > 0.0) || !(level < 1.0))
    throw std::invalid_argument("bootstrap_ci requires 0 < level < 1");
  if (resamples < 1) throw std::invalid_argument("bootstrap_ci requires resamples >= 1");

  Rng rng(seed);
  std::vector<double> means(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      acc += values[rng.uniform_index(values.size())];
    }
    means[b] = acc / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());

  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * means[lo] + w * means[hi];
  };
  const double tail = (1.0 - level) / 2.0;
  return ConfInterval{quantile(tail), quantile(1.0 - tail)};
}

void ProtocolConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(eps > 0.0) || !(eps < 1.0)) fail("config: eps must lie in (0, 1)");
  if (!(lambda > 0.0)) fail("config: lambda must be > 0");
  if (!(delta > 0.0) || delta > B) fail("config: delta must satisfy 0 < delta <= B");
  if (kernel.kind == Kernel::Kind::rbf && !(kernel.gamma > 0.0))
    fail("config: rbf kernel requires gamma > 0");
  if (kernel.kind == Kernel::Kind::rbf && model != ModelId::krr)
    fail("config: only krr supports an rbf kernel");
  if (repetitions < 1) fail("config: repetitions must be >= 1");
  double fsum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) fail("config: split fractions must be positive");
    fsum += f;
  }
  if (std::abs(fsum - 1.0) > 1e-9) fail("config: split fractions must sum to 1");
  if (stratify && model == ModelId::krr)
    fail("config: stratification requires a classification model");
  if (methods.empty()) fail("config: methods must be nonempty");
  if (!(sampling_constant > 0.0)) fail("config: sampling constant must be > 0");
  if (sampling_trials < 1) fail("config: sampling trials must be >= 1");
  if (bootstrap.resamples < 1) fail("config: bootstrap resamples must be >= 1");
  if (!(bootstrap.level > 0.0) || !(bootstrap.level < 1.0))
    fail("config: bootstrap level must lie in (0, 1)");
  if (sweep.num_directions < 1) fail("config: sweep num_directions must be >= 1");
  if (sweep.num_radii < 2) fail("config: sweep num_radii must be >= 2");
  if (threads < 1) fail("config: threads must be >= 1");
  for (double dg : delta_grid) {
    if (!(dg > 0.0) || dg > B) fail("config: delta_grid entries must lie in (0, B]");
  }
  for (double eg : eps_grid) {
    if (!(eg > 0.0) || !(eg < 1.0)) fail("config: eps_grid entries must lie in (0, 1)");
  }
  if (cap_R && *cap_R < 0.0) fail("config: R override must be >= 0");
  if (cap_Y && *cap_Y < 0.0) fail("config: Y override must be >= 0");
  if (cap_kappa && *cap_kappa < 0.0) fail("config: kappa override must be >= 0");
}

namespace {

Task task_for_model(ModelId model) {
  return model == ModelId::krr ? Task::regression : Task::binary_classification;
}

Dataset relabel_for_model(const Dataset& ds, ModelId model) {
  if (ds.task() != Task::binary_classification) return ds;
  return relabel(ds, model == ModelId::svm ? LabelAlphabet::pm_one : LabelAlphabet::zero_one);
}

ModelParams resolve_params(const ProtocolConfig& config, const Dataset& train) {
  ModelParams p;
  p.lambda = config.lambda;
  p.B = config.B;
  p.delta = config.delta;
  p.kernel = config.kernel;
  p.R = config.cap_R ? *config.cap_R : train.feature_norm_cap();
  p.Y = config.cap_Y ? *config.cap_Y : train.label_cap();
  if (config.cap_kappa) {
    p.kappa = *config.cap_kappa;
  } else {
    p.kappa = config.kernel.kind == Kernel::Kind::rbf ? 1.0 : train.feature_norm_cap();
  }
  return p;
}

ModelParams with_delta(ModelParams p, double delta) {
  p.delta = delta;
  return p;
}

}  // namespace

EvalReport run_protocol(const ProtocolConfig& config, const Dataset& ds) {
  config.validate();
  if (ds.task() != task_for_model(config.model)) {
    throw ConfigError(std::string("config: model ") + to_string(config.model) + " requires a " +
                      to_string(task_for_model(config.model)) + " dataset");
  }
  set_max_threads(config.threads);
  const EpsilonSchedule sched = epsilon_schedule(config.eps);

  EvalReport report;
  report.version = kVersion;
  report.config = config;
  report.notes.push_back(
      config.duwt_weight == DuwtWeight::one_plus_eps
          ? "duwt weight assumption: 1 + eps (minimax under T_U <= eps' only)"
          : "duwt weight assumption: n / |S| (count ratio)");
  if (!config.record_runtimes) {
    report.notes.push_back("runtime_ms fields are 0: runtime recording disabled for byte-stable reports");
  }

  // Retained per successful repetition for the eps curve and delta ablation.
  std::vector<Dataset> trains;
  std::vector<ModelParams> train_params;
  std::vector<SensitivityProfile> profiles;

  for (std::size_t r = 1; r <= config.repetitions; ++r) {
    RepetitionRecord rec;
    rec.repetition = r;
    rec.split_seed = config.base_seed + (r - 1);
    try {
      SplitResult sp = split(ds, rec.split_seed, config.fractions, config.stratify);
      StandardizeResult st = standardize(sp.train, {&sp.val, &sp.test});
      const Dataset train = relabel_for_model(st.train, config.model);
      const Dataset val = relabel_for_model(st.others[0], config.model);
      const Dataset test = relabel_for_model(st.others[1], config.model);
      rec.train_n = train.n();
      rec.val_n = val.n();
      rec.test_n = test.n();

      const ModelParams params = resolve_params(config, train);
      rec.cap_R = params.R;
      rec.cap_Y = params.Y;
      rec.cap_kappa = params.kappa;

      const SensitivityProfile profile = oracle_for(config.model, train, params);
      rec.s_total = profile.total();
      rec.shi = profile.shi();

      const HypothesisSweep sweep = make_sweep_for(config.model, params, train,
                                                   config.sweep, config.sweep_seed + (r - 1));
      SweepEvaluator eval(train, params, config.model, sweep);
      const std::uint64_t sampling_seed = config.base_seed * 1000003ULL + r;

      std::optional<TrimResult> tr;
      auto ensure_trim = [&]() -> const TrimResult& {
        if (!tr) tr = trim(profile, sched);
        return *tr;
      };

      std::optional<Coreset> aduwt_coreset_for_fit;
      for (Method method : config.methods) {
        MethodRecord m;
        m.method = method;
        Stopwatch watch(config.record_runtimes);
        WeightedCoreset wc;
        switch (method) {
          case Method::aduwt: {
            const TrimResult& t = ensure_trim();
            Coreset c{t.kept, t.alpha};
            m.coreset_size = c.indices.size();
            m.t_u = t.t_u;
            m.alpha = t.alpha;
            aduwt_coreset_for_fit = c;
            wc = WeightedCoreset(c);
            break;
          }
          case Method::duwt: {
            const TrimResult& t = ensure_trim();
            const double weight = config.duwt_weight == DuwtWeight::one_plus_eps
                                      ? 1.0 + sched.eps
                                      : static_cast<double>(profile.size()) /
                                            static_cast<double>(t.kept.size());
            Coreset c{t.kept, weight};
            m.coreset_size = c.indices.size();
            m.t_u = t.t_u;
            m.alpha = weight;
            wc = WeightedCoreset(c);
            break;
          }
          case Method::sampling: {
            const std::size_t k = sampling_size_estimate(profile, sched, config.sampling_constant).k;
            wc = importance_sample(profile, k, sampling_seed);
            m.sample_count = k;
            m.coreset_size = wc.indices.size();
            break;
          }
        }
        const VerdictRecord verdict = guarantee_check(eval, wc, config.eps);
        m.max_rel_err = verdict.max_err;
        m.argmax_hypothesis = verdict.argmax_hypothesis;
        m.guarantee_pass = verdict.pass;
        m.violations = verdict.violations;
        m.runtime_ms = watch.elapsed_ms();
        rec.methods.push_back(std::move(m));
      }

      if (config.fit_enabled) {
        if (!aduwt_coreset_for_fit) {
          const TrimResult& t = ensure_trim();
          aduwt_coreset_for_fit = Coreset{t.kept, t.alpha};
        }
        const Hypothesis h_full =
            fit_gradient_descent(config.model, train, params, config.fit);
        const Hypothesis h_core = fit_gradient_descent(
            config.model, train, WeightedCoreset(*aduwt_coreset_for_fit), params, config.fit);
        FitRecord fr;
        fr.full_train_objective = total_loss(h_full, train, params, config.model);
        fr.coreset_train_objective = total_loss(h_core, train, params, config.model);
        fr.full_val_mean_loss = total_loss(h_full, val, params, config.model) / static_cast<double>(val.n());
        fr.full_test_mean_loss = total_loss(h_full, test, params, config.model) / static_cast<double>(test.n());
        fr.coreset_val_mean_loss = total_loss(h_core, val, params, config.model) / static_cast<double>(val.n());
        fr.coreset_test_mean_loss = total_loss(h_core, test, params, config.model) / static_cast<double>(test.n());
        rec.fit = fr;
      }

      trains.push_back(train);
      train_params.push_back(params);
      profiles.push_back(profile);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    report.records.push_back(std::move(rec));
  }

  // Aggregates per configured method, in config order.
  std::size_t method_ordinal = 0;
  for (Method method : config.methods) {
    MethodAggregate agg;
    agg.method = method;
    std::vector<double> errs, sizes;
    for (const RepetitionRecord& rec : report.records) {
      for (const MethodRecord& m : rec.methods) {
        if (m.method != method) continue;
        errs.push_back(m.max_rel_err);
        sizes.push_back(static_cast<double>(m.coreset_size));
        if (m.guarantee_pass) ++agg.guarantee_pass_count;
        ++agg.record_count;
      }
    }
    if (!errs.empty()) {
      agg.err_mean = mean_of(errs);
      agg.err_sd = population_sd(errs, agg.err_mean);
      agg.size_mean = mean_of(sizes);
      agg.size_sd = population_sd(sizes, agg.size_mean);
      agg.err_ci = bootstrap_ci(errs, config.bootstrap.resamples, config.bootstrap.level,
                                config.bootstrap.seed + method_ordinal);
    }
    report.aggregates.push_back(agg);
    ++method_ordinal;
  }

  // |S| vs eps over the retained profiles.
  for (double eg : config.eps_grid) {
    const EpsilonSchedule sg = epsilon_schedule(eg);
    std::vector<double> sizes;
    for (const SensitivityProfile& p : profiles) {
      const TrimSelection sel = trim_selection(p.bounds(), sg.eps_prime);
      if (sel.m == p.size()) {
        report.notes.push_back("size_vs_eps: eps = " + fmt_double(eg) +
                               " trims every point on one repetition; entry skipped");
        continue;
      }
      sizes.push_back(static_cast<double>(p.size() - sel.m));
    }
    CurvePoint pt;
    pt.eps = eg;
    pt.size_mean = mean_of(sizes);
    pt.size_sd = population_sd(sizes, pt.size_mean);
    report.size_vs_eps.push_back(pt);
  }

  // Delta ablation: rerun oracle + trim per delta over the retained trains.
  for (double dg : config.delta_grid) {
    std::vector<double> totals, sizes, tus, alphas;
    for (std::size_t i = 0; i < trains.size(); ++i) {
      const ModelParams pd = with_delta(train_params[i], dg);
      try {
        const SensitivityProfile p = oracle_for(config.model, trains[i], pd);
        const TrimResult t = trim(p, sched);
        totals.push_back(p.total());
        sizes.push_back(static_cast<double>(t.kept.size()));
        tus.push_back(t.t_u);
        alphas.push_back(t.alpha);
      } catch (const std::exception& e) {
        report.notes.push_back("delta_ablation: delta = " + fmt_double(dg) +
                               " failed on one repetition: " + e.what());
      }
    }
    AblationRow row;
    row.delta = dg;
    row.s_total_mean = mean_of(totals);
    row.size_mean = mean_of(sizes);
    row.t_u_mean = mean_of(tus);
    row.alpha_mean = mean_of(alphas);
    report.delta_ablation.push_back(row);
  }

  return report;
}

nlohmann::ordered_json config_to_json(const ProtocolConfig& c) {
  nlohmann::ordered_json j;
  j["model"] = to_string(c.model);
  j["kernel"] = {{"kind", c.kernel.kind == Kernel::Kind::rbf ? "rbf" : "linear"},
                 {"gamma", c.kernel.gamma}};
  j["lambda"] = c.lambda;
  j["B"] = c.B;
  j["delta"] = c.delta;
  j["caps"] = {{"R", c.cap_R ? nlohmann::ordered_json(*c.cap_R) : nlohmann::ordered_json(nullptr)},
               {"Y", c.cap_Y ? nlohmann::ordered_json(*c.cap_Y) : nlohmann::ordered_json(nullptr)},
               {"kappa", c.cap_kappa ? nlohmann::ordered_json(*c.cap_kappa)
                                     : nlohmann::ordered_json(nullptr)}};
  j["eps"] = c.eps;
  j["sweep"] = {{"num_directions", c.sweep.num_directions},
                {"num_radii", c.sweep.num_radii},
                {"seed", c.sweep_seed}};
  j["repetitions"] = c.repetitions;
  j["fractions"] = c.fractions;
  j["stratify"] = c.stratify;
  j["base_seed"] = c.base_seed;
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["duwt_weight"] = c.duwt_weight == DuwtWeight::one_plus_eps ? "one_plus_eps" : "count_ratio";
  j["sampling"] = {{"constant", c.sampling_constant}, {"trials", c.sampling_trials}};
  j["bootstrap"] = {{"resamples", c.bootstrap.resamples},
                    {"level", c.bootstrap.level},
                    {"seed", c.bootstrap.seed}};
  j["delta_grid"] = c.delta_grid;
  j["eps_grid"] = c.eps_grid;
  j["fit"] = {{"enabled", c.fit_enabled}, {"steps", c.fit.steps}, {"step0", c.fit.step0}};
  j["record_runtimes"] = c.record_runtimes;
  j["threads"] = c.threads;
  return j;
}

namespace {

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json method_record_to_json(const MethodRecord& m) {
  nlohmann::ordered_json j;
  j["method"] = to_string(m.method);
  j["coreset_size"] = m.coreset_size;
  j["sample_count"] = m.sample_count ? nlohmann::ordered_json(*m.sample_count)
                                     : nlohmann::ordered_json(nullptr);
  j["t_u"] = opt_json(m.t_u);
  j["alpha"] = opt_json(m.alpha);
  j["max_rel_err"] = m.max_rel_err;
  j["argmax_hypothesis"] = m.argmax_hypothesis;
  j["guarantee_pass"] = m.guarantee_pass;
  nlohmann::ordered_json viol = nlohmann::ordered_json::array();
  for (const GuaranteeViolation& v : m.violations) {
    viol.push_back({{"hypothesis_index", v.hypothesis_index}, {"rel_err", v.rel_err}});
  }
  j["violations"] = viol;
  j["runtime_ms"] = m.runtime_ms;
  return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["version"] = report.version;
  j["config"] = config_to_json(report.config);

  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const RepetitionRecord& rec : report.records) {
    nlohmann::ordered_json r;
    r["repetition"] = rec.repetition;
    r["split_seed"] = rec.split_seed;
    r["train_n"] = rec.train_n;
    r["val_n"] = rec.val_n;
    r["test_n"] = rec.test_n;
    r["caps"] = {{"R", rec.cap_R}, {"Y", rec.cap_Y}, {"kappa", rec.cap_kappa}};
    r["s_total"] = rec.s_total;
    r["shi"] = opt_json(rec.shi);
    nlohmann::ordered_json methods = nlohmann::ordered_json::array();
    for (const MethodRecord& m : rec.methods) methods.push_back(method_record_to_json(m));
    r["methods"] = methods;
    if (rec.fit) {
      r["fit"] = {{"full_train_objective", rec.fit->full_train_objective},
                  {"coreset_train_objective", rec.fit->coreset_train_objective},
                  {"full_val_mean_loss", rec.fit->full_val_mean_loss},
                  {"full_test_mean_loss", rec.fit->full_test_mean_loss},
                  {"coreset_val_mean_loss", rec.fit->coreset_val_mean_loss},
                  {"coreset_test_mean_loss", rec.fit->coreset_test_mean_loss}};
    } else {
      r["fit"] = nullptr;
    }
    r["error"] = rec.error ? nlohmann::ordered_json(*rec.error) : nlohmann::ordered_json(nullptr);
    records.push_back(std::move(r));
  }
  j["records"] = records;

  nlohmann::ordered_json aggs = nlohmann::ordered_json::array();
  for (const MethodAggregate& a : report.aggregates) {
    aggs.push_back({{"method", to_string(a.method)},
                    {"records", a.record_count},
                    {"err_mean", a.err_mean},
                    {"err_sd", a.err_sd},
                    {"err_ci", {{"lo", a.err_ci.lo}, {"hi", a.err_ci.hi}}},
                    {"size_mean", a.size_mean},
                    {"size_sd", a.size_sd},
                    {"guarantee_pass_count", a.guarantee_pass_count}});
  }
  j["aggregates"] = aggs;

  nlohmann::ordered_json curve = nlohmann::ordered_json::array();
  for (const CurvePoint& p : report.size_vs_eps) {
    curve.push_back({{"eps", p.eps}, {"size_mean", p.size_mean}, {"size_sd", p.size_sd}});
  }
  j["size_vs_eps"] = curve;

  nlohmann::ordered_json ablation = nlohmann::ordered_json::array();
  for (const AblationRow& row : report.delta_ablation) {
    ablation.push_back({{"delta", row.delta},
                        {"s_total_mean", row.s_total_mean},
                        {"size_mean", row.size_mean},
                        {"t_u_mean", row.t_u_mean},
                        {"alpha_mean", row.alpha_mean}});
  }
  j["delta_ablation"] = ablation;
  j["notes"] = report.notes;
  return j;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "seed,method,eps,delta,coreset_size,t_u,alpha,max_rel_err,guarantee_pass,runtime_ms\n";
  for (const RepetitionRecord& rec : report.records) {
    for (const MethodRecord& m : rec.methods) {
      os << rec.split_seed << "," << to_string(m.method) << "," << fmt_double(report.config.eps)
         << "," << fmt_double(report.config.delta) << "," << m.coreset_size << ","
         << (m.t_u ? fmt_double(*m.t_u) : "") << "," << (m.alpha ? fmt_double(*m.alpha) : "")
         << "," << fmt_double(m.max_rel_err) << "," << (m.guarantee_pass ? "1" : "0") << ","
         << fmt_double(m.runtime_ms) << "\n";
    }
  }
  return os.str();
}

std::vector<ScalingRow> measure_trim_scaling(const std::vector<std::size_t>& sizes,
                                             std::uint64_t seed, double eps,
                                             std::size_t reps) {
  if (reps < 1) throw std::invalid_argument("measure_trim_scaling requires reps >= 1");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw std::invalid_argument("measure_trim_scaling: sizes must be >= 1");
    if (i > 0 && sizes[i] <= sizes[i - 1])
      throw std::invalid_argument("measure_trim_scaling: sizes must be strictly ascending");
  }
  const EpsilonSchedule sched = epsilon_schedule(eps);

  std::vector<ScalingRow> rows;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    Rng rng(seed + si);
    std::vector<double> bounds(sizes[si]);
    for (double& b : bounds) b = rng.uniform01();
    const SensitivityProfile profile = SensitivityProfile::from_bounds(std::move(bounds));

    double best = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const TrimResult r = trim(profile, sched);
      const auto t1 = std::chrono::steady_clock::now();
      (void)r;
      const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      if (rep == 0 || ms < best) best = ms;
    }
    ScalingRow row;
    row.n = sizes[si];
    row.millis = best;
    if (si > 0 && rows.back().millis > 0.0) row.ratio = best / rows.back().millis;
    rows.push_back(row);
  }
  return rows;
}

Dataset load_dataset(const DatasetSpec& spec) {
  if (spec.source == DatasetSpec::Source::csv) {
    return load_csv(spec.path, spec.schema);
  }
  if (spec.task == Task::regression) {
    return synth_regression(spec.n, spec.d, spec.seed, spec.noise_sd, spec.heterogeneity);
  }
  return synth_classification(spec.n, spec.d, spec.seed, spec.margin);
}

nlohmann::ordered_json dataset_spec_to_json(const DatasetSpec& spec) {
  nlohmann::ordered_json j;
  if (spec.source == DatasetSpec::Source::csv) {
    nlohmann::ordered_json s;
    s["path"] = spec.path;
    s["label_column"] = spec.schema.label_column;
    s["feature_columns"] = spec.schema.feature_columns;
    s["task"] = to_string(spec.schema.task);
    nlohmann::ordered_json mapping = nlohmann::ordered_json::object();
    for (const auto& [k, v] : spec.schema.label_mapping) mapping[k] = v;
    s["label_mapping"] = mapping;
    j["csv"] = s;
  } else {
    nlohmann::ordered_json s;
    s["task"] = to_string(spec.task);
    s["n"] = spec.n;
    s["d"] = spec.d;
    s["seed"] = spec.seed;
    if (spec.task == Task::regression) {
      s["noise_sd"] = spec.noise_sd;
      s["heterogeneity"] = spec.heterogeneity;
    } else {
      s["margin"] = spec.margin;
    }
    j["synthetic"] = s;
  }
  return j;
}

namespace {

ConfigError key_error(const std::string& key, const std::string& what) {
  return ConfigError("config key '" + key + "': " + what);
}

const nlohmann::ordered_json& require_key(const nlohmann::ordered_json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError("config: missing required key '" + key + "'");
  return *it;
}

double as_number(const nlohmann::ordered_json& j, const std::string& key) {
  if (!j.is_number()) throw key_error(key, "expected a number");
  return j.get<double>();
}

std::size_t as_count(const nlohmann::ordered_json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw key_error(key, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::string as_string(const nlohmann::ordered_json& j, const std::string& key) {
  if (!j.is_string()) throw key_error(key, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const nlohmann::ordered_json& j, const std::string& key) {
  if (!j.is_boolean()) throw key_error(key, "expected a boolean");
  return j.get<bool>();
}

ModelId parse_model(const std::string& s) {
  if (s == "krr") return ModelId::krr;
  if (s == "logistic") return ModelId::logistic;
  if (s == "svm") return ModelId::svm;
  throw key_error("model", "unknown model '" + s + "' (expected krr, logistic or svm)");
}

Task parse_task(const std::string& s) {
  if (s == "regression") return Task::regression;
  if (s == "classification" || s == "binary-classification") return Task::binary_classification;
  throw key_error("task", "unknown task '" + s + "'");
}

Method parse_method(const std::string& s) {
  if (s == "aduwt") return Method::aduwt;
  if (s == "duwt") return Method::duwt;
  if (s == "sampling") return Method::sampling;
  throw key_error("methods", "unknown method '" + s + "'");
}

DatasetSpec parse_dataset_spec(const nlohmann::ordered_json& j) {
  DatasetSpec spec;
  if (j.contains("csv")) {
    const auto& c = j.at("csv");
    spec.source = DatasetSpec::Source::csv;
    spec.path = as_string(require_key(c, "path"), "dataset.csv.path");
    spec.schema.label_column = as_string(require_key(c, "label_column"), "dataset.csv.label_column");
    spec.schema.task = parse_task(as_string(require_key(c, "task"), "dataset.csv.task"));
    if (c.contains("feature_columns")) {
      for (const auto& f : c.at("feature_columns")) {
        spec.schema.feature_columns.push_back(as_string(f, "dataset.csv.feature_columns"));
      }
    }
    if (c.contains("label_mapping")) {
      for (const auto& [k, v] : c.at("label_mapping").items()) {
        spec.schema.label_mapping[k] = as_number(v, "dataset.csv.label_mapping");
      }
    }
  } else if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    spec.source = DatasetSpec::Source::synthetic;
    spec.task = parse_task(as_string(require_key(s, "task"), "dataset.synthetic.task"));
    spec.n = as_count(require_key(s, "n"), "dataset.synthetic.n");
    spec.d = as_count(require_key(s, "d"), "dataset.synthetic.d");
    if (s.contains("seed")) spec.seed = as_count(s.at("seed"), "dataset.synthetic.seed");
    if (s.contains("noise_sd")) spec.noise_sd = as_number(s.at("noise_sd"), "dataset.synthetic.noise_sd");
    if (s.contains("heterogeneity"))
      spec.heterogeneity = as_number(s.at("heterogeneity"), "dataset.synthetic.heterogeneity");
    if (s.contains("margin")) spec.margin = as_number(s.at("margin"), "dataset.synthetic.margin");
  } else {
    throw ConfigError("config: dataset must contain either 'csv' or 'synthetic'");
  }
  return spec;
}

}  // namespace

RunSpec parse_run_spec(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  RunSpec spec;
  ProtocolConfig& c = spec.protocol;

  c.model = parse_model(as_string(require_key(j, "model"), "model"));
  c.eps = as_number(require_key(j, "eps"), "eps");
  spec.dataset = parse_dataset_spec(require_key(j, "dataset"));

  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    const std::string kind = as_string(require_key(k, "kind"), "kernel.kind");
    if (kind == "linear") {
      c.kernel = Kernel::linear();
    } else if (kind == "rbf") {
      c.kernel = Kernel::rbf(as_number(require_key(k, "gamma"), "kernel.gamma"));
    } else {
      throw key_error("kernel.kind", "expected 'linear' or 'rbf'");
    }
  }
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (p.contains("lambda")) c.lambda = as_number(p.at("lambda"), "params.lambda");
    if (p.contains("B")) c.B = as_number(p.at("B"), "params.B");
    if (p.contains("delta")) c.delta = as_number(p.at("delta"), "params.delta");
    if (p.contains("R") && !p.at("R").is_null()) c.cap_R = as_number(p.at("R"), "params.R");
    if (p.contains("Y") && !p.at("Y").is_null()) c.cap_Y = as_number(p.at("Y"), "params.Y");
    if (p.contains("kappa") && !p.at("kappa").is_null())
      c.cap_kappa = as_number(p.at("kappa"), "params.kappa");
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (s.contains("num_directions"))
      c.sweep.num_directions = as_count(s.at("num_directions"), "sweep.num_directions");
    if (s.contains("num_radii")) c.sweep.num_radii = as_count(s.at("num_radii"), "sweep.num_radii");
    if (s.contains("seed")) c.sweep_seed = as_count(s.at("seed"), "sweep.seed");
  }
  if (j.contains("repetitions")) c.repetitions = as_count(j.at("repetitions"), "repetitions");
  if (j.contains("split")) {
    const auto& s = j.at("split");
    if (s.contains("fractions")) {
      const auto& f = s.at("fractions");
      if (!f.is_array() || f.size() != 3)
        throw key_error("split.fractions", "expected an array of 3 numbers");
      for (std::size_t i = 0; i < 3; ++i) c.fractions[i] = as_number(f[i], "split.fractions");
    }
    if (s.contains("stratify")) c.stratify = as_bool(s.at("stratify"), "split.stratify");
  }
  if (j.contains("base_seed")) c.base_seed = as_count(j.at("base_seed"), "base_seed");
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(as_string(m, "methods")));
  }
  if (j.contains("duwt_weight")) {
    const std::string w = as_string(j.at("duwt_weight"), "duwt_weight");
    if (w == "one_plus_eps") c.duwt_weight = DuwtWeight::one_plus_eps;
    else if (w == "count_ratio") c.duwt_weight = DuwtWeight::count_ratio;
    else throw key_error("duwt_weight", "expected 'one_plus_eps' or 'count_ratio'");
  }
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    if (s.contains("constant")) c.sampling_constant = as_number(s.at("constant"), "sampling.constant");
    if (s.contains("trials")) c.sampling_trials = as_count(s.at("trials"), "sampling.trials");
  }
  if (j.contains("bootstrap")) {
    const auto& b = j.at("bootstrap");
    if (b.contains("resamples")) c.bootstrap.resamples = as_count(b.at("resamples"), "bootstrap.resamples");
    if (b.contains("level")) c.bootstrap.level = as_number(b.at("level"), "bootstrap.level");
    if (b.contains("seed")) c.bootstrap.seed = as_count(b.at("seed"), "bootstrap.seed");
  }
  if (j.contains("delta_grid")) {
    for (const auto& d : j.at("delta_grid")) c.delta_grid.push_back(as_number(d, "delta_grid"));
  }
  if (j.contains("eps_grid")) {
    for (const auto& e : j.at("eps_grid")) c.eps_grid.push_back(as_number(e, "eps_grid"));
  }
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    if (f.contains("enabled")) c.fit_enabled = as_bool(f.at("enabled"), "fit.enabled");
    if (f.contains("steps")) c.fit.steps = as_count(f.at("steps"), "fit.steps");
    if (f.contains("step0")) c.fit.step0 = as_number(f.at("step0"), "fit.step0");
  }
  if (j.contains("record_runtimes"))
    c.record_runtimes = as_bool(j.at("record_runtimes"), "record_runtimes");
  if (j.contains("threads")) c.threads = as_count(j.at("threads"), "threads");

  if (j.contains("output")) {
    const auto& o = j.at("output");
    if (o.contains("report")) spec.report_path = as_string(o.at("report"), "output.report");
    if (o.contains("csv")) spec.csv_path = as_string(o.at("csv"), "output.csv");
  }

  c.validate();
  return spec;
}

RunSpec load_run_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_run_spec(j);
}

}  // namespace aduwt
