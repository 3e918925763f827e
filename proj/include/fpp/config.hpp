#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpp/distributions.hpp"
#include "fpp/estimators.hpp"

namespace fpp {

// Configuration or input errors; the CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  time_constant,
  upper_tail,
  slab,
  sum_tail,
  anomalous_scan,
  dist_check,
};

const char* experiment_name(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::time_constant;
  EdgeWeightModel model = make_weibull(1.0, 1.0);
  int d = 2;
  std::vector<int> n_list;
  double xi = 0.0;
  std::int64_t replicas = 0;
  std::uint64_t seed = 1;

  // upper-tail options
  EstimatorKind estimator = EstimatorKind::tilted;
  std::optional<double> shift;  // default when absent: xi * n per point
  double mixture_weight = 0.5;
  std::optional<double> mu_hat;  // estimated when absent
  double mu_std_error = 0.0;     // > 0 enables the slope-spread report
  int mu_replicas = 200;

  // slab options
  int K = 0;
  double epsilon = 0.0;

  // sum-tail options
  int k = 1;
  double c = 0.1;

  // dist-check options
  std::int64_t samples = 1000000;

  std::string out_csv = "results.csv";
  std::string out_summary = "summary.json";
};

// Parses and validates a JSON config. Unknown keys, missing required keys,
// wrong types, and out-of-domain values all raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Parses the model grammar, e.g. {"kind":"weibull","alpha":1,"r":0.5}.
// Shared by experiment configs and the dist-check CLI input.
EdgeWeightModel parse_model_json(const std::string& json_text);

}  // namespace fpp
