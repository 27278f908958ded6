#include "aduwt/ingest.hpp"

#include "aduwt/oracles.hpp"
#include "aduwt/trimming.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

#include <cmath>

using namespace aduwt;

TEST_CASE("load_csv reads the documented dialect") {
  testutil::TempDir dir("csv");
  const std::string path = dir.file("data.csv");
  testutil::write_text(path, "a,b,y\n1.0,2.0,3.5\n-0.5,0.25,1.5\n0,0,0\n");

  CsvSchema schema;
  schema.label_column = "y";
  schema.task = Task::regression;
  const Dataset ds = load_csv(path, schema);
  CHECK(ds.n() == 3);
  CHECK(ds.d() == 2);
  CHECK(ds.features()(0, 0) == 1.0);
  CHECK(ds.features()(1, 1) == 0.25);
  CHECK(ds.label(0) == 3.5);
  CHECK(ds.label_cap() == 3.5);
  CHECK(ds.feature_norm_cap() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("load_csv applies the label mapping before parsing") {
  testutil::TempDir dir("csvmap");
  const std::string path = dir.file("data.csv");
  testutil::write_text(path, "x0,label\n0.1,pos\n-0.1,neg\n0.2,pos\n");

  CsvSchema schema;
  schema.label_column = "label";
  schema.task = Task::binary_classification;
  schema.label_mapping = {{"pos", 1.0}, {"neg", -1.0}};
  const Dataset ds = load_csv(path, schema);
  CHECK(labels_in_alphabet(ds, LabelAlphabet::pm_one));
  CHECK(ds.label(1) == -1.0);
}

TEST_CASE("load_csv errors carry line and column information") {
  testutil::TempDir dir("csvbad");

  const std::string nan_path = dir.file("nan.csv");
  testutil::write_text(nan_path, "x0,y\n0.5,1.0\nnan,2.0\n");
  CsvSchema schema;
  schema.label_column = "y";
  CHECK_THROWS_WITH_AS(load_csv(nan_path, schema),
                       doctest::Contains("line 3"), std::invalid_argument);

  const std::string junk_path = dir.file("junk.csv");
  testutil::write_text(junk_path, "x0,y\n0.5,1.0\nabc,2.0\n");
  try {
    load_csv(junk_path, schema);
    FAIL("expected parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("x0") != std::string::npos);
  }

  const std::string short_path = dir.file("short.csv");
  testutil::write_text(short_path, "x0,x1,y\n0.5,1.0\n");
  CHECK_THROWS_WITH_AS(load_csv(short_path, schema),
                       doctest::Contains("line 2"), std::invalid_argument);

  const std::string missing_col = dir.file("col.csv");
  testutil::write_text(missing_col, "x0,target\n0.5,1.0\n");
  CHECK_THROWS_WITH_AS(load_csv(missing_col, schema),
                       doctest::Contains("no column 'y'"), std::invalid_argument);

  CHECK_THROWS_AS(load_csv(dir.file("absent.csv"), schema), std::invalid_argument);
}

TEST_CASE("load_csv rejects non-binary classification labels") {
  testutil::TempDir dir("csvlab");
  const std::string path = dir.file("data.csv");
  testutil::write_text(path, "x0,y\n0.5,1\n0.2,2\n");
  CsvSchema schema;
  schema.label_column = "y";
  schema.task = Task::binary_classification;
  CHECK_THROWS_AS(load_csv(path, schema), std::invalid_argument);
}

TEST_CASE("save and load round-trip bit-exactly") {
  testutil::TempDir dir("rt");
  const std::string path = dir.file("ds.csv");
  const Dataset original = synth_regression(40, 3, 99, 0.3, 0.5);
  save_csv(original, path);

  CsvSchema schema;
  schema.label_column = "y";
  schema.task = Task::regression;
  const Dataset loaded = load_csv(path, schema);
  REQUIRE(loaded.n() == original.n());
  REQUIRE(loaded.d() == original.d());
  CHECK(loaded.features() == original.features());
  CHECK(loaded.labels() == original.labels());
}

TEST_CASE("synthetic generators are deterministic in the seed") {
  const Dataset a = synth_regression(30, 4, 7, 0.1, 0.5);
  const Dataset b = synth_regression(30, 4, 7, 0.1, 0.5);
  CHECK(a.features() == b.features());
  CHECK(a.labels() == b.labels());
  const Dataset c = synth_regression(30, 4, 8, 0.1, 0.5);
  CHECK(a.labels() != c.labels());

  const Dataset ca = synth_classification(30, 4, 7, 2.0);
  const Dataset cb = synth_classification(30, 4, 7, 2.0);
  CHECK(ca.features() == cb.features());
  CHECK(ca.labels() == cb.labels());
}

TEST_CASE("attached caps dominate every point exactly") {
  const Dataset ds = synth_regression(200, 3, 17, 0.5, 0.8);
  double max_norm = 0.0, max_label = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    max_norm = std::max(max_norm, ds.point(i).norm());
    max_label = std::max(max_label, std::abs(ds.label(i)));
  }
  CHECK(ds.feature_norm_cap() == max_norm);
  CHECK(ds.label_cap() == max_label);
}

TEST_CASE("zero heterogeneity with a dominating constant branch flattens the oracle") {
  const Dataset ds = synth_regression(300, 4, 21, 0.5, 0.0);
  ModelParams p;
  p.lambda = 1.0;
  p.B = 1.0;
  p.delta = 1.0;
  p.Y = ds.label_cap();
  p.kappa = ds.feature_norm_cap();
  // constant branch is > 2 Y^2 >= 2 while the energy terms sum to 1 across
  // all points, so every point takes the constant
  const SensitivityProfile prof = krr_oracle(ds, p);
  REQUIRE(prof.shi().has_value());
  CHECK(*prof.shi() <= 1e-12);  // identical bounds up to accumulation rounding
}

TEST_CASE("high heterogeneity makes the label-energy branch heavy-tailed") {
  const Dataset ds = synth_regression(1000, 4, 23, 0.5, 0.9);
  // SHI of the energy fractions y_i^2 / sum equals the SHI of {y_i^2}
  std::vector<double> energy(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) energy[i] = ds.label(i) * ds.label(i);
  const SensitivityProfile prof = SensitivityProfile::from_bounds(energy);
  REQUIRE(prof.shi().has_value());
  CHECK(*prof.shi() > 1.0);
}

TEST_CASE("wide-margin clusters are nearly separable along the cluster axis") {
  const Dataset ds = synth_classification(200, 2, 31, 10.0);
  // estimate the separating direction from the class means
  Eigen::VectorXd mean_pos = Eigen::VectorXd::Zero(2), mean_neg = Eigen::VectorXd::Zero(2);
  double n_pos = 0.0, n_neg = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.label(i) == 1.0) {
      mean_pos += ds.point(i);
      n_pos += 1.0;
    } else {
      mean_neg += ds.point(i);
      n_neg += 1.0;
    }
  }
  mean_pos /= n_pos;
  mean_neg /= n_neg;
  Eigen::VectorXd w = mean_pos - mean_neg;
  w.normalize();

  std::size_t hinge_free = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double y = ds.label(i) == 1.0 ? 1.0 : -1.0;
    if (y * w.dot(ds.point(i)) >= 1.0) ++hinge_free;
  }
  CHECK(static_cast<double>(hinge_free) / static_cast<double>(ds.n()) >= 0.95);
}

TEST_CASE("zero margin keeps both classes present and overlapping") {
  const Dataset ds = synth_classification(100, 2, 41, 0.0);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) pos += ds.label(i) == 1.0 ? 1 : 0;
  CHECK(pos == 50);
  CHECK(labels_in_alphabet(ds, LabelAlphabet::zero_one));
  const Dataset pm = relabel(ds, LabelAlphabet::pm_one);
  CHECK(labels_in_alphabet(pm, LabelAlphabet::pm_one));
}

TEST_CASE("generator argument validation") {
  CHECK_THROWS_AS(synth_regression(0, 2, 1, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(synth_regression(5, 0, 1, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(synth_regression(5, 2, 1, 0.1, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(synth_classification(1, 2, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(synth_classification(10, 2, 1, -1.0), std::invalid_argument);
}
