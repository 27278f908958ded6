// Command-line front end: sensitivity oracles, trimming, protocol evaluation,
// method comparison and synthetic data generation.
//
// Exit codes: 0 success, 2 usage or bound-validation error, 3 empty coreset,
// 4 config error, 5 guarantee check failed (defect signal), 1 other failure.

#include "aduwt/baselines.hpp"
#include "aduwt/format.hpp"
#include "aduwt/harness.hpp"
#include "aduwt/ingest.hpp"
#include "aduwt/oracles.hpp"
#include "aduwt/parallel.hpp"
#include "aduwt/trimming.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using namespace aduwt;

class GuaranteeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleArgs {
  std::string model;
  std::string data_path;
  std::string label_col = "y";
  std::string features;   // comma-separated, empty = all others
  std::string label_map;  // key=value,key=value
  double lambda = 1.0, B = 1.0, delta = 1.0;
  double kappa = -1.0, Y = -1.0, R = -1.0;  // -1 = not given
  std::string kernel = "linear";
  double gamma = 1.0;
  std::string out;
};

struct TrimArgs {
  std::string bounds_path;
  double eps = 0.1;
  std::string out;
};

struct EvaluateArgs {
  std::string config_path;
  std::string out_prefix;
  std::size_t threads = 0;  // 0 = take from config
};

struct SynthArgs {
  std::string task;
  std::size_t n = 100, d = 2;
  std::uint64_t seed = 0;
  double noise = 0.1, heterogeneity = 0.0, margin = 1.0;
  std::string out;
};

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::map<std::string, double> parse_label_map(const std::string& s) {
  std::map<std::string, double> out;
  for (const std::string& pair : split_csv_list(s)) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--label-map entries must look like key=value");
    const std::string key = pair.substr(0, eq);
    const std::string val = pair.substr(eq + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc{} || ptr != val.data() + val.size())
      throw std::invalid_argument("--label-map value '" + val + "' is not a number");
    out[key] = v;
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

int run_oracle(const OracleArgs& a) {
  ModelId model;
  if (a.model == "krr") model = ModelId::krr;
  else if (a.model == "logistic") model = ModelId::logistic;
  else if (a.model == "svm") model = ModelId::svm;
  else throw std::invalid_argument("--model must be krr, logistic or svm");

  if (model == ModelId::krr && (a.kappa < 0.0 || a.Y < 0.0))
    throw std::invalid_argument("krr oracle requires --kappa and --Y");
  if (model != ModelId::krr && a.R < 0.0)
    throw std::invalid_argument(a.model + " oracle requires --R");

  CsvSchema schema;
  schema.label_column = a.label_col;
  schema.feature_columns = split_csv_list(a.features);
  schema.task = model == ModelId::krr ? Task::regression : Task::binary_classification;
  schema.label_mapping = parse_label_map(a.label_map);
  Dataset ds = load_csv(a.data_path, schema);
  if (model == ModelId::logistic) ds = relabel(ds, LabelAlphabet::zero_one);
  if (model == ModelId::svm) ds = relabel(ds, LabelAlphabet::pm_one);

  ModelParams params;
  params.lambda = a.lambda;
  params.B = a.B;
  params.delta = a.delta;
  params.kappa = std::max(a.kappa, 0.0);
  params.Y = std::max(a.Y, 0.0);
  params.R = std::max(a.R, 0.0);
  params.kernel = a.kernel == "rbf" ? Kernel::rbf(a.gamma) : Kernel::linear();

  const SensitivityProfile profile = oracle_for(model, ds, params);

  std::ostringstream csv;
  csv << "index,bound\n";
  for (std::size_t i = 0; i < profile.size(); ++i) {
    csv << i << "," << fmt_double(profile.bounds()[i]) << "\n";
  }
  write_file(a.out, csv.str());

  std::cout << "n=" << profile.size() << " S_total=" << fmt_double(profile.total())
            << " mean=" << fmt_double(profile.mean()) << " std=" << fmt_double(profile.stddev())
            << " shi=" << (profile.shi() ? fmt_double(*profile.shi()) : "undefined") << "\n";
  return 0;
}

int run_trim(const TrimArgs& a) {
  std::ifstream in(a.bounds_path);
  if (!in) throw std::invalid_argument("cannot open bounds file: " + a.bounds_path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("bounds file is empty");
  std::vector<std::pair<std::size_t, double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("bounds line " + std::to_string(line_no) + ": expected index,bound");
    std::size_t idx = 0;
    double bound = 0.0;
    const std::string istr = line.substr(0, comma);
    std::string bstr = line.substr(comma + 1);
    if (!bstr.empty() && bstr.back() == '\r') bstr.pop_back();
    auto [p1, e1] = std::from_chars(istr.data(), istr.data() + istr.size(), idx);
    auto [p2, e2] = std::from_chars(bstr.data(), bstr.data() + bstr.size(), bound);
    if (e1 != std::errc{} || e2 != std::errc{} || p1 != istr.data() + istr.size() ||
        p2 != bstr.data() + bstr.size()) {
      throw std::invalid_argument("bounds line " + std::to_string(line_no) + ": cannot parse '" + line + "'");
    }
    rows.emplace_back(idx, bound);
  }
  if (rows.empty()) throw std::invalid_argument("bounds file has no data rows");
  std::vector<double> bounds(rows.size(), -1.0);
  for (const auto& [idx, bound] : rows) {
    if (idx >= bounds.size() || bounds[idx] >= 0.0)
      throw std::invalid_argument("bounds file must carry each index 0..n-1 exactly once");
    bounds[idx] = bound;
  }

  const EpsilonSchedule sched = epsilon_schedule(a.eps);
  const SensitivityProfile profile = SensitivityProfile::from_bounds(std::move(bounds));
  const TrimResult r = trim(profile, sched);

  std::ostringstream csv;
  csv << "index,weight\n";
  for (std::size_t i : r.kept) csv << i << "," << fmt_double(r.alpha) << "\n";
  write_file(a.out, csv.str());

  std::cout << "m=" << r.m << " T_U=" << fmt_double(r.t_u) << " alpha=" << fmt_double(r.alpha)
            << " |S|=" << r.kept.size() << "\n";
  return 0;
}

int run_evaluate(const EvaluateArgs& a) {
  RunSpec spec = load_run_spec(a.config_path);
  if (!a.out_prefix.empty()) {
    spec.report_path = a.out_prefix + ".json";
    spec.csv_path = a.out_prefix + ".csv";
  }
  if (spec.report_path.empty() || spec.csv_path.empty())
    throw ConfigError("config: output.report and output.csv are required (or pass --out)");
  if (a.threads > 0) spec.protocol.threads = a.threads;

  const Dataset ds = load_dataset(spec.dataset);
  const EvalReport report = run_protocol(spec.protocol, ds);

  nlohmann::ordered_json j = report_to_json(report);
  j["config"]["dataset"] = dataset_spec_to_json(spec.dataset);
  write_file(spec.report_path, j.dump(2) + "\n");
  write_file(spec.csv_path, report_to_csv(report));

  bool defect = false;
  for (const RepetitionRecord& rec : report.records) {
    if (rec.error) {
      std::cout << "repetition " << rec.repetition << " failed: " << *rec.error << "\n";
    }
    for (const MethodRecord& m : rec.methods) {
      if (m.method == Method::aduwt && !m.guarantee_pass) {
        defect = true;
        std::cout << "guarantee violation: repetition " << rec.repetition << ", max_rel_err="
                  << fmt_double(m.max_rel_err) << " > eps=" << fmt_double(report.config.eps) << "\n";
      }
    }
  }
  for (const MethodAggregate& agg : report.aggregates) {
    std::cout << to_string(agg.method) << ": err=" << fmt_double(agg.err_mean) << "+-"
              << fmt_double(agg.err_sd) << " size=" << fmt_double(agg.size_mean)
              << " pass=" << agg.guarantee_pass_count << "/" << agg.record_count << "\n";
  }
  std::cout << "report: " << spec.report_path << "\ncsv: " << spec.csv_path << "\n";
  if (defect) throw GuaranteeFailure("an aduwt guarantee check failed; see the report");
  return 0;
}

int run_compare(const EvaluateArgs& a) {
  RunSpec spec = load_run_spec(a.config_path);
  if (a.threads > 0) spec.protocol.threads = a.threads;
  const ProtocolConfig& c = spec.protocol;
  set_max_threads(c.threads);

  const Dataset full = load_dataset(spec.dataset);
  const EpsilonSchedule sched = epsilon_schedule(c.eps);

  // One-repetition snapshot in the shape of the comparison table.
  SplitResult sp = split(full, c.base_seed, c.fractions, c.stratify);
  StandardizeResult st = standardize(sp.train, {&sp.val, &sp.test});
  Dataset train = st.train;
  if (train.task() == Task::binary_classification) {
    train = relabel(train, c.model == ModelId::svm ? LabelAlphabet::pm_one
                                                   : LabelAlphabet::zero_one);
  }
  ModelParams params;
  params.lambda = c.lambda;
  params.B = c.B;
  params.delta = c.delta;
  params.kernel = c.kernel;
  params.R = c.cap_R ? *c.cap_R : train.feature_norm_cap();
  params.Y = c.cap_Y ? *c.cap_Y : train.label_cap();
  params.kappa = c.cap_kappa ? *c.cap_kappa
                             : (c.kernel.kind == Kernel::Kind::rbf ? 1.0 : train.feature_norm_cap());

  const SensitivityProfile profile = oracle_for(c.model, train, params);
  const HypothesisSweep sweep = make_sweep_for(c.model, params, train, c.sweep, c.sweep_seed);
  SweepEvaluator eval(train, params, c.model, sweep);

  struct Row {
    std::string method, size, err, verdict;
  };
  std::vector<Row> rows;
  bool aduwt_failed = false;
  nlohmann::ordered_json out_json = nlohmann::ordered_json::array();

  for (Method method : c.methods) {
    Row row;
    row.method = to_string(method);
    if (method == Method::aduwt || method == Method::duwt) {
      const TrimResult t = trim(profile, sched);
      const double weight =
          method == Method::aduwt
              ? t.alpha
              : (c.duwt_weight == DuwtWeight::one_plus_eps
                     ? 1.0 + c.eps
                     : static_cast<double>(profile.size()) / static_cast<double>(t.kept.size()));
      const VerdictRecord v = guarantee_check(eval, WeightedCoreset(Coreset{t.kept, weight}), c.eps);
      row.size = std::to_string(t.kept.size());
      row.err = fmt_double(v.max_err);
      row.verdict = v.pass ? "Yes" : "No";
      if (method == Method::aduwt && !v.pass) aduwt_failed = true;
      out_json.push_back({{"method", row.method},
                          {"coreset_size", t.kept.size()},
                          {"max_rel_err", v.max_err},
                          {"guarantee", v.pass}});
    } else {
      const std::size_t k = sampling_size_estimate(profile, sched, c.sampling_constant).k;
      const ViolationReport vr = violation_rate(train, params, c.model, sched, k, sweep,
                                                c.sampling_trials, c.base_seed * 1000003ULL + 1);
      const std::size_t violations = static_cast<std::size_t>(
          std::llround(vr.rate * static_cast<double>(c.sampling_trials)));
      row.size = "k=" + std::to_string(k);
      row.err = fmt_double(vr.worst_error) + " (worst trial)";
      row.verdict = (violations > 0 ? "No (" : "Yes (") + std::to_string(violations) + "/" +
                    std::to_string(c.sampling_trials) + " trials)";
      out_json.push_back({{"method", row.method},
                          {"sample_count", k},
                          {"worst_rel_err", vr.worst_error},
                          {"violation_rate", vr.rate},
                          {"trials", c.sampling_trials}});
    }
    rows.push_back(std::move(row));
  }

  std::cout << std::left << std::setw(12) << "method" << std::setw(14) << "size"
            << std::setw(38) << "max_rel_err" << "guarantee\n";
  for (const Row& row : rows) {
    std::cout << std::left << std::setw(12) << row.method << std::setw(14) << row.size
              << std::setw(38) << row.err << row.verdict << "\n";
  }

  if (!a.out_prefix.empty()) write_file(a.out_prefix, out_json.dump(2) + "\n");
  if (aduwt_failed) throw GuaranteeFailure("aduwt guarantee check failed in comparison run");
  return 0;
}

int run_synth(const SynthArgs& a) {
  Dataset ds = [&]() {
    if (a.task == "regression") {
      return synth_regression(a.n, a.d, a.seed, a.noise, a.heterogeneity);
    }
    if (a.task == "classification") {
      return synth_classification(a.n, a.d, a.seed, a.margin);
    }
    throw std::invalid_argument("--task must be regression or classification");
  }();
  save_csv(ds, a.out);
  std::cout << "wrote " << ds.n() << " points, d=" << ds.d() << ", task=" << to_string(ds.task())
            << " to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic coreset construction via adaptive uniform-weight trimming"};
  app.require_subcommand(1);

  OracleArgs oracle_args;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "compute per-point sensitivity bounds");
  oracle_cmd->add_option("--model", oracle_args.model, "krr, logistic or svm")->required();
  oracle_cmd->add_option("--data", oracle_args.data_path, "input CSV")->required();
  oracle_cmd->add_option("--label-col", oracle_args.label_col, "label column name (default y)");
  oracle_cmd->add_option("--features", oracle_args.features, "feature columns, comma-separated");
  oracle_cmd->add_option("--label-map", oracle_args.label_map, "label mapping key=value,...");
  oracle_cmd->add_option("--lambda", oracle_args.lambda, "regularization weight")->required();
  oracle_cmd->add_option("--B", oracle_args.B, "hypothesis norm cap")->required();
  oracle_cmd->add_option("--delta", oracle_args.delta, "hypothesis norm floor")->required();
  oracle_cmd->add_option("--kappa", oracle_args.kappa, "kernel diagonal cap (krr)");
  oracle_cmd->add_option("--Y", oracle_args.Y, "label magnitude cap (krr)");
  oracle_cmd->add_option("--R", oracle_args.R, "feature norm cap (logistic/svm)");
  oracle_cmd->add_option("--kernel", oracle_args.kernel, "linear or rbf (krr)");
  oracle_cmd->add_option("--gamma", oracle_args.gamma, "rbf width");
  oracle_cmd->add_option("--out", oracle_args.out, "bounds CSV output path")->required();

  TrimArgs trim_args;
  CLI::App* trim_cmd = app.add_subcommand("trim", "trim a bounds file into a weighted coreset");
  trim_cmd->add_option("--bounds", trim_args.bounds_path, "bounds CSV (index,bound)")->required();
  trim_cmd->add_option("--eps", trim_args.eps, "target tolerance in (0,1)")->required();
  trim_cmd->add_option("--out", trim_args.out, "coreset CSV output path")->required();

  EvaluateArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "run the evaluation protocol from a config");
  eval_cmd->add_option("--config", eval_args.config_path, "JSON config path")->required();
  eval_cmd->add_option("--out", eval_args.out_prefix, "output prefix (overrides config paths)");
  eval_cmd->add_option("--threads", eval_args.threads, "worker thread cap");

  EvaluateArgs compare_args;
  CLI::App* compare_cmd = app.add_subcommand("compare", "table-shaped method comparison");
  compare_cmd->add_option("--config", compare_args.config_path, "JSON config path")->required();
  compare_cmd->add_option("--out", compare_args.out_prefix, "optional JSON output path");
  compare_cmd->add_option("--threads", compare_args.threads, "worker thread cap");

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset CSV");
  synth_cmd->add_option("--task", synth_args.task, "regression or classification")->required();
  synth_cmd->add_option("--n", synth_args.n, "number of points")->required();
  synth_cmd->add_option("--d", synth_args.d, "dimension")->required();
  synth_cmd->add_option("--seed", synth_args.seed, "generation seed")->required();
  synth_cmd->add_option("--noise", synth_args.noise, "label noise sd (regression)");
  synth_cmd->add_option("--heterogeneity", synth_args.heterogeneity, "outlier mix in [0,1] (regression)");
  synth_cmd->add_option("--margin", synth_args.margin, "cluster separation (classification)");
  synth_cmd->add_option("--out", synth_args.out, "dataset CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (oracle_cmd->parsed()) return run_oracle(oracle_args);
    if (trim_cmd->parsed()) return run_trim(trim_args);
    if (eval_cmd->parsed()) return run_evaluate(eval_args);
    if (compare_cmd->parsed()) return run_compare(compare_args);
    if (synth_cmd->parsed()) return run_synth(synth_args);
  } catch (const aduwt::BoundViolationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const aduwt::BoundViolation& v : e.violations()) {
      std::cerr << "  " << v.message() << "\n";
    }
    return 2;
  } catch (const aduwt::EmptyCoresetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const aduwt::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const GuaranteeFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
