#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fpp/config.hpp"
#include "fpp/dist_check.hpp"
#include "fpp/experiments.hpp"
#include "fpp/svg_plot.hpp"

namespace {

int default_threads() {
  const char* env = std::getenv("FPP_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 1024) return 1;
  return static_cast<int>(v);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fpp::ConfigError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_run_digest(const fpp::RunOutput& out) {
  const nlohmann::json& s = out.summary;
  std::cout << "wrote " << out.csv_path.string() << " (" << out.rows.size()
            << " rows)\n"
            << "wrote " << out.summary_path.string() << "\n";
  if (s.contains("mu_hat"))
    std::cout << "mu_hat = " << s["mu_hat"].get<double>() << " +- "
              << s["std_error"].get<double>() << "\n";
  if (s.contains("fit") && !s["fit"].is_null()) {
    std::cout << "fit slope = " << s["fit"]["slope"].get<double>() << " +- "
              << s["fit"]["slope_std_error"].get<double>();
    if (s.contains("target_slope"))
      std::cout << " (target " << s["target_slope"].get<double>() << ")";
    std::cout << "\n";
  }
  if (s.contains("log_p_strictly_decreasing"))
    std::cout << "log p strictly decreasing: "
              << (s["log_p_strictly_decreasing"].get<bool>() ? "yes" : "no")
              << "\n";
  if (s.contains("all_below_bound"))
    std::cout << "all points below bound: "
              << (s["all_below_bound"].get<bool>() ? "yes" : "no") << "\n";
  if (s.contains("all_intervals_match"))
    std::cout << "all intervals match: "
              << (s["all_intervals_match"].get<bool>() ? "yes" : "no")
              << "\n";
  if (s.contains("ks_stat"))
    std::cout << "ks_stat = " << s["ks_stat"].get<double>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "first-passage percolation: simulation and rare-event estimation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", csv_path, svg_path, model_path;
  int threads = default_threads();
  std::int64_t samples = 1000000;
  std::uint64_t seed = 1;

  CLI::App* run =
      app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "experiment config (JSON)")
      ->required();
  run->add_option("--out", out_dir, "output directory (default: .)");
  run->add_option("--threads", threads,
                  "worker threads (default: FPP_THREADS or 1)")
      ->check(CLI::Range(1, 1024));

  CLI::App* plot =
      app.add_subcommand("plot", "render log p vs n^r from a results CSV");
  plot->add_option("csv", csv_path, "results CSV produced by 'run'")
      ->required();
  plot->add_option("svg", svg_path, "output SVG path")->required();

  CLI::App* dc = app.add_subcommand(
      "dist-check", "distribution self-checks for a model JSON");
  dc->add_option("model", model_path, "model spec (JSON)")->required();
  dc->add_option("--samples", samples, "sample count for the KS statistic")
      ->check(CLI::Range(std::int64_t{10}, std::int64_t{1000000000}));
  dc->add_option("--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      fpp::ExperimentConfig cfg = fpp::load_config(config_path);
      fpp::RunOutput out = fpp::run_experiment(cfg, out_dir, threads);
      print_run_digest(out);
    } else if (*plot) {
      fpp::emit_plot(csv_path, svg_path);
      std::cout << "wrote " << svg_path << "\n";
    } else {
      fpp::EdgeWeightModel model =
          fpp::parse_model_json(read_file(model_path));
      std::cout << fpp::format_report(fpp::dist_check(model, samples, seed));
    }
  } catch (const fpp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
