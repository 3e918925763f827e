#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <doctest.h>

#include "fpp/config.hpp"
#include "fpp/dist_check.hpp"
#include "fpp/experiments.hpp"
#include "fpp/results.hpp"
#include "fpp/svg_plot.hpp"

using namespace fpp;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

fs::path fresh_dir(const std::string& leaf) {
  fs::path p = fs::temp_directory_path() / "fpp_harness" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  REQUIRE(out.good());
  out << text;
}

// Runs the installed CLI binary and returns its exit status.
int run_cli(const std::string& args, const fs::path& stdout_to) {
  std::string cmd = std::string(FPP_CLI_PATH) + " " + args + " > " +
                    stdout_to.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config parser accepts a full upper-tail config") {
  ExperimentConfig cfg = parse_config(R"({
    "experiment": "upper-tail",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 0.5},
    "d": 2,
    "n_list": [16, 24, 32],
    "xi": 3.0,
    "replicas": 1000,
    "estimator": "tilted",
    "shift": 48.0,
    "mixture_weight": 0.5,
    "mu_hat": 0.45,
    "mu_std_error": 0.002,
    "seed": 9,
    "out_csv": "tail.csv",
    "out_summary": "tail.json"
  })");
  CHECK(cfg.experiment == ExperimentKind::upper_tail);
  CHECK(std::holds_alternative<WeibullModel>(cfg.model));
  CHECK(cfg.d == 2);
  CHECK(cfg.n_list == std::vector<int>{16, 24, 32});
  CHECK(cfg.xi == 3.0);
  CHECK(cfg.replicas == 1000);
  CHECK(cfg.estimator == EstimatorKind::tilted);
  REQUIRE(cfg.shift.has_value());
  CHECK(*cfg.shift == 48.0);
  CHECK(cfg.mixture_weight == 0.5);
  REQUIRE(cfg.mu_hat.has_value());
  CHECK(*cfg.mu_hat == 0.45);
  CHECK(cfg.mu_std_error == 0.002);
  CHECK(cfg.seed == 9);
  CHECK(cfg.out_csv == "tail.csv");
  CHECK(cfg.out_summary == "tail.json");
}

TEST_CASE("config defaults") {
  ExperimentConfig cfg = parse_config(R"({
    "experiment": "upper-tail",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2,
    "n_list": [8, 16],
    "xi": 1.0,
    "replicas": 100
  })");
  CHECK(cfg.seed == 1);
  CHECK(cfg.estimator == EstimatorKind::tilted);
  CHECK(!cfg.shift.has_value());
  CHECK(cfg.mixture_weight == 0.5);
  CHECK(!cfg.mu_hat.has_value());
  CHECK(cfg.mu_replicas == 200);
  CHECK(cfg.out_csv == "results.csv");
  CHECK(cfg.out_summary == "summary.json");
}

TEST_CASE("config parser rejects malformed inputs") {
  // Not JSON at all.
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  // Unknown top-level key.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "time-constant",
    "model": {"kind": "degenerate", "value": 1.0},
    "d": 2, "n_list": [2], "replicas": 30, "bogus": 1
  })"), ConfigError);
  // Unknown model key.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "time-constant",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0, "beta": 2},
    "d": 2, "n_list": [2], "replicas": 30
  })"), ConfigError);
  // Unknown experiment / estimator names.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "lower-tail",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "n_list": [2], "replicas": 30
  })"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "upper-tail",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "n_list": [2], "xi": 1.0, "replicas": 30,
    "estimator": "fancy"
  })"), ConfigError);
  // Unsorted n_list.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "time-constant",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "n_list": [8, 4], "replicas": 30
  })"), ConfigError);
  // Model parameters out of domain.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "time-constant",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.5},
    "d": 2, "n_list": [2], "replicas": 30
  })"), ConfigError);
  // Time-constant replica floor.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "time-constant",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "n_list": [2], "replicas": 29
  })"), ConfigError);
}

TEST_CASE("config parser rejects cross-field violations") {
  // Slab requires n >= K.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "slab",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "K": 8, "epsilon": 0.3, "n_list": [4, 50], "replicas": 100
  })"), ConfigError);
  // Anomalous scan demands an anomalous model and tower-square lengths.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "anomalous-scan",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "xi": 0.75, "n_list": [4, 16]
  })"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "anomalous-scan",
    "model": {"kind": "anomalous", "alpha1": 1.0, "alpha2": 2.0},
    "d": 2, "xi": 0.75, "n_list": [4, 9]
  })"), ConfigError);
  // Tilting needs a density.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "upper-tail",
    "model": {"kind": "degenerate", "value": 1.0},
    "d": 2, "n_list": [8], "xi": 1.0, "replicas": 100,
    "estimator": "tilted"
  })"), ConfigError);
  // dist-check sample bounds.
  CHECK_THROWS_AS(parse_config(R"({
    "experiment": "dist-check",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "samples": 5
  })"), ConfigError);
  // Valid variants of the above parse fine.
  CHECK_NOTHROW(parse_config(R"({
    "experiment": "anomalous-scan",
    "model": {"kind": "anomalous", "alpha1": 1.0, "alpha2": 2.0},
    "d": 2, "xi": 0.75, "n_list": [4, 16, 256]
  })"));
  CHECK_NOTHROW(parse_config(R"({
    "experiment": "upper-tail",
    "model": {"kind": "degenerate", "value": 1.0},
    "d": 2, "n_list": [8], "xi": 1.0, "replicas": 100,
    "estimator": "naive"
  })"));
}

TEST_CASE("model grammar round trips every kind") {
  CHECK(std::holds_alternative<WeibullModel>(
      parse_model_json(R"({"kind":"weibull","alpha":1.3,"r":0.7})")));
  CHECK(std::holds_alternative<LogPerturbedModel>(parse_model_json(
      R"({"kind":"logperturbed","alpha":1.0,"r":0.5,"gamma":0.4})")));
  CHECK(std::holds_alternative<AnomalousModel>(
      parse_model_json(R"({"kind":"anomalous","alpha1":1.0,"alpha2":2.0})")));
  CHECK(std::holds_alternative<DegenerateModel>(
      parse_model_json(R"({"kind":"degenerate","value":2.0})")));
  CHECK_THROWS_AS(parse_model_json(R"({"kind":"gaussian","sigma":1})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_model_json(R"({"alpha":1.0,"r":0.5})"), ConfigError);
}

TEST_CASE("load_config reports missing files") {
  CHECK_THROWS_AS(load_config("/nonexistent/path/config.json"), ConfigError);
}

TEST_CASE("result rows round trip through csv") {
  ResultRow full;
  full.experiment = "upper-tail";
  full.model = "weibull";
  full.d = 2;
  full.r = 0.5;
  full.alpha = 1.0;
  full.xi = 3.0;
  full.n = 32;
  full.estimator = "tilted";
  full.p_hat = 0.1 + 0.2;  // not exactly representable; %.17g must round trip
  full.std_error = 1.2345678901234567e-9;
  full.log_p = -123.45678901234567;
  full.bound = 2.2250738585072014e-308;
  full.seed = 12345678901234567ull;
  full.walltime_ms = 17.25;

  ResultRow sparse;
  sparse.experiment = "dist-check";
  sparse.model = "degenerate";
  sparse.estimator = "analytic";
  sparse.log_p = -kInf;
  sparse.seed = 3;

  fs::path dir = fresh_dir("roundtrip");
  fs::path csv = dir / "rows.csv";
  write_results_csv(csv.string(), {full, sparse});

  auto rows = read_results_csv(csv.string());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].experiment == "upper-tail");
  CHECK(rows[0].d == 2);
  CHECK(rows[0].r == 0.5);
  CHECK(rows[0].p_hat == full.p_hat);
  CHECK(rows[0].std_error == full.std_error);
  CHECK(rows[0].log_p == full.log_p);
  CHECK(rows[0].bound == full.bound);
  CHECK(rows[0].seed == full.seed);
  CHECK(rows[0].walltime_ms == full.walltime_ms);
  CHECK(!rows[1].d.has_value());
  CHECK(!rows[1].p_hat.has_value());
  REQUIRE(rows[1].log_p.has_value());
  CHECK(*rows[1].log_p == -kInf);
  CHECK(rows[1].seed == 3);

  // The file leads with the schema then the header.
  std::string text = slurp(csv);
  CHECK(text.rfind(kResultsSchema, 0) == 0);
  CHECK(text.find(kResultsHeader) != std::string::npos);
}

TEST_CASE("format_double spells out non-finite values") {
  CHECK(format_double(kInf) == "inf");
  CHECK(format_double(-kInf) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv reader validates schema and header") {
  fs::path dir = fresh_dir("badcsv");
  fs::path no_schema = dir / "a.csv";
  spit(no_schema, std::string("wrong\n") + kResultsHeader + "\n");
  CHECK_THROWS_AS(read_results_csv(no_schema.string()), ConfigError);

  fs::path no_header = dir / "b.csv";
  spit(no_header, std::string(kResultsSchema) + "\nnot,the,header\n");
  CHECK_THROWS_AS(read_results_csv(no_header.string()), ConfigError);

  CHECK_THROWS_AS(read_results_csv((dir / "missing.csv").string()),
                  ConfigError);

  fs::path bad_fields = dir / "c.csv";
  spit(bad_fields, std::string(kResultsSchema) + "\n" + kResultsHeader +
                       "\nonly,three,fields\n");
  CHECK_THROWS_AS(read_results_csv(bad_fields.string()), ConfigError);
}

TEST_CASE("results comparison ignores walltime only") {
  ResultRow row;
  row.experiment = "slab";
  row.model = "weibull";
  row.estimator = "naive";
  row.p_hat = 0.25;
  row.seed = 5;
  row.walltime_ms = 10.0;

  fs::path dir = fresh_dir("modwall");
  ResultRow same = row;
  same.walltime_ms = 99.0;
  ResultRow diff = row;
  diff.p_hat = 0.26;

  write_results_csv((dir / "a.csv").string(), {row});
  write_results_csv((dir / "b.csv").string(), {same});
  write_results_csv((dir / "c.csv").string(), {diff});
  write_results_csv((dir / "d.csv").string(), {row, same});

  CHECK(results_equal_modulo_walltime((dir / "a.csv").string(),
                                      (dir / "b.csv").string()));
  CHECK(!results_equal_modulo_walltime((dir / "a.csv").string(),
                                       (dir / "c.csv").string()));
  CHECK(!results_equal_modulo_walltime((dir / "a.csv").string(),
                                       (dir / "d.csv").string()));
}

TEST_CASE("time-constant experiment with degenerate weights is exact") {
  ExperimentConfig cfg = parse_config(R"({
    "experiment": "time-constant",
    "model": {"kind": "degenerate", "value": 1.0},
    "d": 2, "n_list": [2, 4], "replicas": 30, "seed": 5
  })");
  fs::path dir = fresh_dir("tc");
  RunOutput out = run_experiment(cfg, dir);
  CHECK(fs::exists(out.csv_path));
  CHECK(fs::exists(out.summary_path));
  CHECK(out.summary["mu_hat"] == 1.0);
  CHECK(out.summary["subadditive_ok"] == true);
  CHECK(out.summary["schema"] == "fpp.summary.v1");
  CHECK(out.summary["experiment"] == "time-constant");
  REQUIRE(out.rows.size() == 2);
  CHECK(out.rows[0].estimator == "mean");
  CHECK(out.rows[0].n == 2);
  CHECK(out.rows[0].p_hat == 1.0);  // mean T / n
  CHECK(out.rows[1].p_hat == 1.0);
  auto reread = read_results_csv(out.csv_path.string());
  CHECK(reread.size() == 2);
}

TEST_CASE("upper-tail experiment emits rows, fit, and spread") {
  ExperimentConfig cfg = parse_config(R"({
    "experiment": "upper-tail",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "n_list": [4, 6, 8, 10], "xi": 0.5, "replicas": 3000,
    "mu_hat": 0.5, "mu_std_error": 0.01, "seed": 77
  })");
  fs::path dir = fresh_dir("tail");
  RunOutput out = run_experiment(cfg, dir);
  REQUIRE(out.rows.size() == 4);
  for (const auto& row : out.rows) {
    CHECK(row.estimator == "tilted");
    CHECK(row.xi == 0.5);
    REQUIRE(row.bound.has_value());
    REQUIRE(row.log_p.has_value());
    CHECK(std::isfinite(*row.log_p));
  }
  CHECK(!out.summary["fit"].is_null());
  CHECK(out.summary["fit"].contains("slope"));
  CHECK(out.summary.contains("target_slope"));
  CHECK(out.summary.contains("relative_slope_error"));
  CHECK(out.summary.contains("slope_spread"));
  CHECK(out.summary["mu"]["value"] == 0.5);
  CHECK(out.summary["mu"]["source"] == "config");
}

TEST_CASE("experiment output is byte-identical across thread counts") {
  ExperimentConfig cfg = parse_config(R"({
    "experiment": "upper-tail",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "n_list": [4, 6, 8, 10], "xi": 0.5, "replicas": 2000,
    "mu_hat": 0.5, "seed": 123
  })");
  fs::path dir1 = fresh_dir("det1");
  fs::path dir3 = fresh_dir("det3");
  run_experiment(cfg, dir1, 1);
  run_experiment(cfg, dir3, 3);
  CHECK(results_equal_modulo_walltime((dir1 / "results.csv").string(),
                                      (dir3 / "results.csv").string()));
}

TEST_CASE("sum-tail experiment reports the analytic bound") {
  ExperimentConfig cfg = parse_config(R"({
    "experiment": "sum-tail",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 0.5},
    "k": 1, "n_list": [4, 9], "replicas": 50000, "c": 0.1, "seed": 31
  })");
  fs::path dir = fresh_dir("sumtail");
  RunOutput out = run_experiment(cfg, dir);
  REQUIRE(out.rows.size() == 2);
  REQUIRE(out.rows[0].bound.has_value());
  CHECK(*out.rows[0].bound == std::exp(-0.9 * 2.0));
  CHECK(*out.rows[1].bound == std::exp(-0.9 * 3.0));
  CHECK(out.summary["all_below_bound"] == true);
  CHECK(out.summary["first_point_positive"] == true);
}

TEST_CASE("anomalous-scan experiment verifies the regime map analytically") {
  ExperimentConfig cfg = parse_config(R"({
    "experiment": "anomalous-scan",
    "model": {"kind": "anomalous", "alpha1": 1.0, "alpha2": 2.0},
    "d": 2, "xi": 0.75, "n_list": [4, 16, 256], "seed": 2
  })");
  fs::path dir = fresh_dir("scan");
  RunOutput out = run_experiment(cfg, dir);
  REQUIRE(out.rows.size() == 3);
  CHECK(out.summary["all_intervals_match"] == true);
  CHECK(out.rows[0].estimator == "analytic");
  // s = 0.75 * 4 = 3 sits in [2,4): survival(3) from the interval-sum
  // reference.
  REQUIRE(out.rows[0].p_hat.has_value());
  CHECK(std::abs(*out.rows[0].p_hat - 0.028008771485514307) <= 1e-13);
  for (const auto& pt : out.summary["points"]) {
    CHECK(pt["interval_matches_m"] == true);
  }
}

TEST_CASE("dist-check experiment summarizes without csv rows") {
  ExperimentConfig cfg = parse_config(R"({
    "experiment": "dist-check",
    "model": {"kind": "degenerate", "value": 1.0},
    "seed": 4
  })");
  fs::path dir = fresh_dir("dc");
  RunOutput out = run_experiment(cfg, dir);
  CHECK(out.rows.empty());
  CHECK(out.summary["trivially_exact"] == true);
  auto rows = read_results_csv(out.csv_path.string());
  CHECK(rows.empty());
}

TEST_CASE("dist_check reports sane statistics for a continuous model") {
  DistCheckReport rep = dist_check(make_weibull(1.0, 1.0), 20000, 6);
  CHECK(rep.ks_stat > 0.0);
  CHECK(rep.ks_stat < 0.02);
  CHECK(std::abs(rep.quadrature - 1.0) < 1e-8);
  CHECK(rep.slopes.empty());
  std::string text = format_report(rep);
  CHECK(text.find("ks_stat") != std::string::npos);

  DistCheckReport an = dist_check(make_anomalous(1.0, 2.0), 20000, 7);
  CHECK(an.ks_stat < 0.02);
  CHECK(std::abs(an.quadrature - 1.0) < 1e-8);
  REQUIRE(an.slopes.size() == 5);
  for (const auto& s : an.slopes)
    CHECK(std::abs(s.slope - s.expected) < 1e-9);
  CHECK(an.sandwich_ok);
  CHECK(an.c4 > 0.0);
  CHECK(an.c5 >= an.c4);
  CHECK_THROWS_AS(dist_check(make_weibull(1.0, 1.0), 5, 1),
                  std::invalid_argument);
}

TEST_CASE("plot renders points, fit, and reference") {
  ExperimentConfig cfg = parse_config(R"({
    "experiment": "upper-tail",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "n_list": [4, 6, 8, 10], "xi": 0.5, "replicas": 2000,
    "mu_hat": 0.5, "seed": 11
  })");
  fs::path dir = fresh_dir("plot");
  RunOutput out = run_experiment(cfg, dir);
  fs::path svg = dir / "plot.svg";
  emit_plot(out.csv_path.string(), svg.string());
  std::string text = slurp(svg);
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("fit slope") != std::string::npos);
  CHECK(text.find("reference slope") != std::string::npos);

  // A CSV without two finite log_p rows cannot be plotted.
  fs::path empty_csv = dir / "empty.csv";
  ResultRow row;
  row.experiment = "upper-tail";
  row.model = "weibull";
  row.estimator = "tilted";
  row.n = 4;
  row.log_p = -1.0;
  row.seed = 1;
  write_results_csv(empty_csv.string(), {row});
  CHECK_THROWS_AS(emit_plot(empty_csv.string(), (dir / "x.svg").string()),
                  ConfigError);
}

TEST_CASE("cli runs experiments end to end") {
  fs::path dir = fresh_dir("cli_run");
  fs::path cfg = dir / "cfg.json";
  spit(cfg, R"({
    "experiment": "time-constant",
    "model": {"kind": "degenerate", "value": 1.0},
    "d": 2, "n_list": [2, 4], "replicas": 30, "seed": 5
  })");
  int rc = run_cli("run " + cfg.string() + " --out " + (dir / "out").string(),
                   dir / "stdout.txt");
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "out" / "results.csv"));
  CHECK(fs::exists(dir / "out" / "summary.json"));
  std::string out_text = slurp(dir / "stdout.txt");
  CHECK(out_text.find("mu_hat") != std::string::npos);
}

TEST_CASE("cli reports config errors with exit code 2") {
  fs::path dir = fresh_dir("cli_bad");
  fs::path cfg = dir / "bad.json";
  spit(cfg, R"({"experiment": "time-constant"})");
  CHECK(run_cli("run " + cfg.string(), dir / "o1.txt") == 2);
  CHECK(run_cli("run " + (dir / "missing.json").string(), dir / "o2.txt") ==
        2);
  // CLI grammar violations are also exit 2.
  CHECK(run_cli("frobnicate", dir / "o3.txt") == 2);
  CHECK(run_cli("run", dir / "o4.txt") == 2);
}

TEST_CASE("cli plot and dist-check subcommands") {
  fs::path dir = fresh_dir("cli_plot");
  fs::path cfg = dir / "cfg.json";
  spit(cfg, R"({
    "experiment": "upper-tail",
    "model": {"kind": "weibull", "alpha": 1.0, "r": 1.0},
    "d": 2, "n_list": [4, 6, 8, 10], "xi": 0.5, "replicas": 1000,
    "mu_hat": 0.5, "seed": 3
  })");
  REQUIRE(run_cli("run " + cfg.string() + " --out " + (dir / "out").string(),
                  dir / "o1.txt") == 0);
  fs::path csv = dir / "out" / "results.csv";
  fs::path svg = dir / "plot.svg";
  CHECK(run_cli("plot " + csv.string() + " " + svg.string(),
                dir / "o2.txt") == 0);
  CHECK(fs::exists(svg));
  // Unwritable target path: write failure, not a config error.
  CHECK(run_cli("plot " + csv.string() + " /nonexistent_dir_zz/x.svg",
                dir / "o3.txt") == 1);

  fs::path model = dir / "model.json";
  spit(model, R"({"kind": "weibull", "alpha": 1.0, "r": 1.0})");
  CHECK(run_cli("dist-check " + model.string() + " --samples 20000",
                dir / "o4.txt") == 0);
  std::string text = slurp(dir / "o4.txt");
  CHECK(text.find("ks_stat") != std::string::npos);

  CHECK(run_cli("--help", dir / "o5.txt") == 0);
}
