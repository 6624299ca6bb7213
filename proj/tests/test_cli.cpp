#include "threshreg/rng.hpp"
#include "threshreg/sim_harness.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const std::string kCli = THRESHREG_CLI_PATH;

int run_cli(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = kCli + " " + args;
  if (!stdout_file.empty()) cmd += " > " + stdout_file;
  cmd += " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_demo_csv(const std::string& path, int n = 60, double noise = 0.1,
                    std::uint64_t seed = 99) {
  threshreg::RandomStream rng(seed, 0, 18);
  std::ofstream out(path);
  out << "y,x1,x2,x3,x4\n";
  for (int i = 0; i < n; ++i) {
    const double x1 = rng.gaussian(), x2 = rng.gaussian(),
                 x3 = rng.gaussian(), x4 = rng.gaussian();
    const double y = 1.5 * x1 - 0.9 * x3 + noise * rng.gaussian();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.10f,%.10f,%.10f,%.10f,%.10f\n", y, x1,
                  x2, x3, x4);
    out << buf;
  }
}

}  // namespace

TEST_CASE("cli: fit emits a SparseFit JSON and finds the true support") {
  const std::string csv = "/tmp/threshreg_cli_fit.csv";
  const std::string out = "/tmp/threshreg_cli_fit.json";
  write_demo_csv(csv);
  const int code = run_cli(
      "fit --data " + csv + " --response y --penalty hard --lambda 0.4", out);
  CHECK(code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["penalty"] == "hard");
  CHECK(j["support"] == std::vector<int>{0, 2});
  CHECK(j["converged"] == true);
  std::remove(csv.c_str());
  std::remove(out.c_str());
}

TEST_CASE("cli: unknown flag exits 1, missing file exits 2") {
  CHECK(run_cli("fit --no-such-flag") == 1);
  CHECK(run_cli("fit --data /tmp/does_not_exist_threshreg.csv --response y "
                "--lambda 0.1") == 2);
  CHECK(run_cli("") == 1);  // a subcommand is required
}

TEST_CASE("cli: malformed csv cell exits 2") {
  const std::string csv = "/tmp/threshreg_cli_bad.csv";
  std::ofstream(csv) << "y,x\n1,2\n3,zap\n";
  CHECK(run_cli("fit --data " + csv + " --response y --lambda 0.1") == 2);
  std::remove(csv.c_str());
}

TEST_CASE("cli: path selects by validation when given one") {
  const std::string train = "/tmp/threshreg_cli_train.csv";
  const std::string val = "/tmp/threshreg_cli_val.csv";
  const std::string out = "/tmp/threshreg_cli_path.json";
  write_demo_csv(train, 60);
  write_demo_csv(val, 40, 0.1, 123);
  const int code =
      run_cli("path --data " + train + " --response y --penalty hard "
              "--grid-count 25 --validation " + val, out);
  CHECK(code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["entries"].size() == 25);
  CHECK(j["selected"]["support"] == std::vector<int>{0, 2});
  std::remove(train.c_str());
  std::remove(val.c_str());
  std::remove(out.c_str());
}

TEST_CASE("cli: simulate twice with one seed is byte-identical") {
  const std::string design = "/tmp/threshreg_cli_design.json";
  threshreg::SimDesign d;
  d.n = 50;
  d.p = 30;
  d.q_repeats = 1;
  d.sigma = 0.3;
  d.n_test = 500;
  d.reps = 2;
  d.seed = 9;
  std::ofstream(design) << threshreg::design_to_json(d);
  REQUIRE(run_cli("simulate --design " + design +
                  " --methods hard,oracle --out-dir /tmp --threads 2",
                  "/dev/null") == 0);
  const std::string rows1 = slurp("/tmp/rows.csv");
  const std::string agg1 = slurp("/tmp/aggregates.json");
  REQUIRE(run_cli("--threads 1 simulate --design " + design +
                  " --methods hard,oracle --out-dir /tmp",
                  "/dev/null") == 0);
  CHECK(slurp("/tmp/rows.csv") == rows1);
  CHECK(slurp("/tmp/aggregates.json") == agg1);
  CHECK(rows1.find("rep,method,pe,") == 0);
  std::remove(design.c_str());
  std::remove("/tmp/rows.csv");
  std::remove("/tmp/aggregates.json");
}

TEST_CASE("cli: spark produces a certificate") {
  const std::string csv = "/tmp/threshreg_cli_spark.csv";
  const std::string out = "/tmp/threshreg_cli_spark.json";
  threshreg::RandomStream rng(7, 0, 19);
  {
    std::ofstream f(csv);
    f << "a,b,c,d\n";
    for (int i = 0; i < 20; ++i) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%.8f,%.8f,%.8f,%.8f\n",
                    rng.gaussian(), rng.gaussian(), rng.gaussian(),
                    rng.gaussian());
      f << buf;
    }
  }
  CHECK(run_cli("spark --data " + csv + " --c 0.3 --tau 2", out) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["tau_checked"] == 2);
  CHECK(j["exhaustive"] == true);
  CHECK(j["witness_subset"].size() == 2);
  std::remove(csv.c_str());
  std::remove(out.c_str());
}

TEST_CASE("cli: risk-curve writes the CSV and the optima") {
  const std::string spec = "/tmp/threshreg_cli_spectral.json";
  const std::string out = "/tmp/threshreg_cli_curve.csv";
  std::ofstream(spec) << R"({"d":[80.0,80.0,80.0],"b":[1.0,0.8,-0.6],"sigma":0.5})";
  const std::string summary_file = "/tmp/threshreg_cli_curve_summary.json";
  CHECK(run_cli("risk-curve --spectral " + spec + " --n 100 --out " + out,
                summary_file) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("lambda1,l2_risk,pred_risk\n") == 0);
  const auto j = nlohmann::json::parse(slurp(summary_file));
  const double expected = 3 * 0.25 / (1.0 + 0.64 + 0.36);
  CHECK(std::abs(j["lambda1_opt_l2"].get<double>() - expected) < 1e-8);
  std::remove(spec.c_str());
  std::remove(out.c_str());
  std::remove(summary_file.c_str());
}

TEST_CASE("cli: refit at lambda1 = 0 returns the OLS coefficients") {
  const std::string csv = "/tmp/threshreg_cli_refit.csv";
  const std::string out = "/tmp/threshreg_cli_refit.json";
  write_demo_csv(csv, 50, 0.0);
  CHECK(run_cli("refit --data " + csv +
                " --response y --support 0,2 --lambda1 0",
                out) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  const auto coef =
      j["beta_nonzero_original_scale"].get<std::vector<double>>();
  CHECK(std::abs(coef[0] - 1.5) < 1e-8);
  CHECK(std::abs(coef[1] + 0.9) < 1e-8);
  std::remove(csv.c_str());
  std::remove(out.c_str());
}
