#include "doctest.h"
#include "test_helpers.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <string>

namespace {

std::string cli_path() {
  if (const char* env = std::getenv("ADUWT_CLI")) return env;
#ifdef ADUWT_CLI_PATH
  return ADUWT_CLI_PATH;
#else
  return "aduwt";
#endif
}

int run_cli(const std::string& args, const std::string& capture_file) {
  const std::string cmd = cli_path() + " " + args + " > " + capture_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::vector<double> read_bound_column(const std::string& path) {
  std::vector<double> out;
  const std::string text = testutil::read_text(path);
  std::size_t pos = text.find('\n');  // skip header
  while (pos != std::string::npos && pos + 1 < text.size()) {
    const std::size_t next = text.find('\n', pos + 1);
    const std::string line = text.substr(pos + 1, next - pos - 1);
    const std::size_t comma = line.find(',');
    if (comma != std::string::npos) out.push_back(std::stod(line.substr(comma + 1)));
    pos = next;
  }
  return out;
}

}  // namespace

TEST_CASE("cli oracle: svm bounds are the closed-form constant") {
  testutil::TempDir dir("cli_svm");
  std::string csv = "x0,x1,y\n";
  for (int i = 0; i < 10; ++i) {
    csv += "0.1,0.2," + std::string(i % 2 == 0 ? "1" : "-1") + "\n";
  }
  testutil::write_text(dir.file("data.csv"), csv);

  const int rc = run_cli("oracle --model svm --data " + dir.file("data.csv") +
                             " --lambda 1 --B 1 --delta 1 --R 1 --out " + dir.file("bounds.csv"),
                         dir.file("out.txt"));
  REQUIRE(rc == 0);
  const std::vector<double> bounds = read_bound_column(dir.file("bounds.csv"));
  REQUIRE(bounds.size() == 10);
  for (double b : bounds) CHECK(b == doctest::Approx(2.1).epsilon(1e-12));
  const std::string out = testutil::read_text(dir.file("out.txt"));
  CHECK(out.find("S_total=21") != std::string::npos);
}

TEST_CASE("cli oracle: krr with zero labels emits the constant branch") {
  testutil::TempDir dir("cli_krr");
  std::string csv = "x0,y\n";
  for (int i = 0; i < 10; ++i) csv += "0,0\n";
  testutil::write_text(dir.file("data.csv"), csv);

  const int rc = run_cli("oracle --model krr --data " + dir.file("data.csv") +
                             " --lambda 1 --B 1 --delta 1 --kappa 1 --Y 1 --out " +
                             dir.file("bounds.csv"),
                         dir.file("out.txt"));
  REQUIRE(rc == 0);
  for (double b : read_bound_column(dir.file("bounds.csv"))) {
    CHECK(b == doctest::Approx(4.1).epsilon(1e-12));
  }
}

TEST_CASE("cli oracle: missing model-specific caps and cap violations exit 2") {
  testutil::TempDir dir("cli_usage");
  testutil::write_text(dir.file("data.csv"), "x0,y\n0,0\n0,1\n");
  CHECK(run_cli("oracle --model krr --data " + dir.file("data.csv") +
                    " --lambda 1 --B 1 --delta 1 --out " + dir.file("b.csv"),
                dir.file("out.txt")) == 2);

  // feature norms above the cap
  testutil::write_text(dir.file("wide.csv"), "x0,y\n5.0,1\n0.1,-1\n");
  const int rc = run_cli("oracle --model svm --data " + dir.file("wide.csv") +
                             " --lambda 1 --B 1 --delta 1 --R 1 --out " + dir.file("b.csv"),
                         dir.file("out.txt"));
  CHECK(rc == 2);
  CHECK(testutil::read_text(dir.file("out.txt")).find("point 0") != std::string::npos);
}

TEST_CASE("cli trim: heavy-tail file keeps only the heavy point") {
  testutil::TempDir dir("cli_trim");
  std::string csv = "index,bound\n";
  for (int i = 0; i < 11; ++i) {
    csv += std::to_string(i) + "," + (i == 2 ? std::string("0.9") : std::string("0.01")) + "\n";
  }
  testutil::write_text(dir.file("bounds.csv"), csv);

  const int rc = run_cli("trim --bounds " + dir.file("bounds.csv") + " --eps 0.1 --out " +
                             dir.file("coreset.csv"),
                         dir.file("out.txt"));
  REQUIRE(rc == 0);
  const std::string out = testutil::read_text(dir.file("out.txt"));
  CHECK(out.find("m=10") != std::string::npos);
  CHECK(out.find("|S|=1") != std::string::npos);
  const std::string coreset = testutil::read_text(dir.file("coreset.csv"));
  CHECK(coreset.find("\n2,1.04880884817") != std::string::npos);
}

TEST_CASE("cli trim: uniform heavy bounds keep everything") {
  testutil::TempDir dir("cli_trim_u");
  testutil::write_text(dir.file("bounds.csv"), "index,bound\n0,1\n1,1\n2,1\n3,1\n4,1\n");
  REQUIRE(run_cli("trim --bounds " + dir.file("bounds.csv") + " --eps 0.1 --out " +
                      dir.file("coreset.csv"),
                  dir.file("out.txt")) == 0);
  const std::vector<double> weights = read_bound_column(dir.file("coreset.csv"));
  REQUIRE(weights.size() == 5);
  for (double w : weights) CHECK(w == doctest::Approx(std::sqrt(0.99)).epsilon(1e-12));
}

TEST_CASE("cli trim: trimming everything exits 3") {
  testutil::TempDir dir("cli_trim_e");
  testutil::write_text(dir.file("bounds.csv"), "index,bound\n0,0\n");
  CHECK(run_cli("trim --bounds " + dir.file("bounds.csv") + " --eps 0.1 --out " +
                    dir.file("coreset.csv"),
                dir.file("out.txt")) == 3);
}

TEST_CASE("cli synth is deterministic in the seed") {
  testutil::TempDir dir("cli_synth");
  REQUIRE(run_cli("synth --task regression --n 30 --d 3 --seed 7 --out " + dir.file("a.csv"),
                  dir.file("out.txt")) == 0);
  REQUIRE(run_cli("synth --task regression --n 30 --d 3 --seed 7 --out " + dir.file("b.csv"),
                  dir.file("out.txt")) == 0);
  REQUIRE(run_cli("synth --task regression --n 30 --d 3 --seed 8 --out " + dir.file("c.csv"),
                  dir.file("out.txt")) == 0);
  CHECK(testutil::read_text(dir.file("a.csv")) == testutil::read_text(dir.file("b.csv")));
  CHECK(testutil::read_text(dir.file("a.csv")) != testutil::read_text(dir.file("c.csv")));
  CHECK(run_cli("synth --task nonsense --n 5 --d 2 --seed 1 --out " + dir.file("d.csv"),
                dir.file("out.txt")) == 2);
}

namespace {

std::string evaluate_config(const std::string& report, const std::string& csv) {
  return std::string("{\n") +
         "  \"model\": \"logistic\",\n"
         "  \"eps\": 0.1,\n"
         "  \"params\": {\"lambda\": 1.0, \"B\": 1.0, \"delta\": 0.5},\n"
         "  \"dataset\": {\"synthetic\": {\"task\": \"classification\", \"n\": 240, \"d\": 3, "
         "\"seed\": 5, \"margin\": 1.0}},\n"
         "  \"sweep\": {\"num_directions\": 8, \"num_radii\": 4, \"seed\": 2},\n"
         "  \"repetitions\": 2,\n"
         "  \"split\": {\"fractions\": [0.6, 0.2, 0.2], \"stratify\": true},\n"
         "  \"base_seed\": 11,\n"
         "  \"methods\": [\"aduwt\", \"duwt\", \"sampling\"],\n"
         "  \"sampling\": {\"constant\": 0.5, \"trials\": 3},\n"
         "  \"bootstrap\": {\"resamples\": 100, \"level\": 0.95, \"seed\": 4},\n"
         "  \"delta_grid\": [0.25, 0.5],\n"
         "  \"eps_grid\": [0.05, 0.1],\n"
         "  \"output\": {\"report\": \"" + report + "\", \"csv\": \"" + csv + "\"}\n" +
         "}\n";
}

}  // namespace

TEST_CASE("cli evaluate: fixed config runs byte-identically twice") {
  testutil::TempDir dir("cli_eval");
  testutil::write_text(dir.file("config.json"),
                       evaluate_config(dir.file("r1.json"), dir.file("r1.csv")));
  REQUIRE(run_cli("evaluate --config " + dir.file("config.json"), dir.file("out1.txt")) == 0);

  testutil::write_text(dir.file("config2.json"),
                       evaluate_config(dir.file("r2.json"), dir.file("r2.csv")));
  REQUIRE(run_cli("evaluate --config " + dir.file("config2.json"), dir.file("out2.txt")) == 0);

  const std::string j1 = testutil::read_text(dir.file("r1.json"));
  REQUIRE_FALSE(j1.empty());
  CHECK(j1 == testutil::read_text(dir.file("r2.json")));
  const std::string c1 = testutil::read_text(dir.file("r1.csv"));
  CHECK(c1 == testutil::read_text(dir.file("r2.csv")));
  CHECK(c1.rfind("seed,method,eps,delta,coreset_size,t_u,alpha,max_rel_err,guarantee_pass,runtime_ms\n", 0) == 0);
}

TEST_CASE("cli evaluate: invalid configs exit 4") {
  testutil::TempDir dir("cli_eval_bad");
  std::string bad = evaluate_config(dir.file("r.json"), dir.file("r.csv"));
  const std::size_t at = bad.find("[0.6, 0.2, 0.2]");
  REQUIRE(at != std::string::npos);
  bad.replace(at, 15, "[0.0, 0.5, 0.5]");
  testutil::write_text(dir.file("config.json"), bad);
  CHECK(run_cli("evaluate --config " + dir.file("config.json"), dir.file("out.txt")) == 4);

  testutil::write_text(dir.file("nojson.json"), "not json at all");
  CHECK(run_cli("evaluate --config " + dir.file("nojson.json"), dir.file("out.txt")) == 4);
}

TEST_CASE("cli compare renders a row per method") {
  testutil::TempDir dir("cli_cmp");
  const std::string config = std::string("{\n") +
      "  \"model\": \"krr\",\n"
      "  \"eps\": 0.1,\n"
      "  \"params\": {\"lambda\": 1e8, \"B\": 1.0, \"delta\": 0.7},\n"
      "  \"dataset\": {\"synthetic\": {\"task\": \"regression\", \"n\": 600, \"d\": 4, "
      "\"seed\": 9, \"noise_sd\": 0.5, \"heterogeneity\": 0.7}},\n"
      "  \"sweep\": {\"num_directions\": 16, \"num_radii\": 8, \"seed\": 3},\n"
      "  \"base_seed\": 21,\n"
      "  \"sampling\": {\"constant\": 0.05, \"trials\": 5}\n"
      "}\n";
  testutil::write_text(dir.file("config.json"), config);
  const int rc = run_cli("compare --config " + dir.file("config.json"), dir.file("out.txt"));
  REQUIRE(rc == 0);
  const std::string out = testutil::read_text(dir.file("out.txt"));
  CHECK(out.find("aduwt") != std::string::npos);
  CHECK(out.find("duwt") != std::string::npos);
  CHECK(out.find("sampling") != std::string::npos);
  CHECK(out.find("k=") != std::string::npos);
  // both trimming rows meet the guarantee on this instance
  CHECK(std::count(out.begin(), out.end(), '\n') >= 4);
  CHECK(out.find("Yes") != std::string::npos);
}
