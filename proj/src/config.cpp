#include "fpp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fpp {

namespace {

using nlohmann::json;

json parse_json_text(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw ConfigError(std::string(what) + ": invalid JSON");
  if (!j.is_object())
    throw ConfigError(std::string(what) + ": expected a JSON object");
  return j;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* scope) {
  for (const auto& item : j.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(),
                          [&](const char* k) { return item.key() == k; });
    if (!ok)
      throw ConfigError(std::string(scope) + ": unknown key '" + item.key() +
                        "'");
  }
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(std::string("missing required key '") + key + "'");
  return *it;
}

double as_number(const json& v, const char* key) {
  if (!v.is_number())
    throw ConfigError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const char* key) {
  if (!v.is_number_integer())
    throw ConfigError(std::string("key '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const char* key) {
  if (!v.is_string())
    throw ConfigError(std::string("key '") + key + "' must be a string");
  return v.get<std::string>();
}

int as_bounded_int(const json& v, const char* key, std::int64_t lo,
                   std::int64_t hi) {
  std::int64_t x = as_integer(v, key);
  if (x < lo || x > hi)
    throw ConfigError(std::string("key '") + key + "' out of range");
  return static_cast<int>(x);
}

std::vector<int> as_n_list(const json& v) {
  if (!v.is_array() || v.empty())
    throw ConfigError("key 'n_list' must be a nonempty array of integers");
  std::vector<int> out;
  for (const auto& e : v)
    out.push_back(as_bounded_int(e, "n_list", 1, (1 << 20) - 1));
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1])
      throw ConfigError("key 'n_list' must be strictly ascending");
  return out;
}

EdgeWeightModel parse_model(const json& j) {
  if (!j.is_object()) throw ConfigError("model: expected a JSON object");
  std::string kind = as_string(require(j, "kind"), "model.kind");
  try {
    if (kind == "weibull") {
      check_keys(j, {"kind", "alpha", "r"}, "model");
      return make_weibull(as_number(require(j, "alpha"), "model.alpha"),
                          as_number(require(j, "r"), "model.r"));
    }
    if (kind == "logperturbed") {
      check_keys(j, {"kind", "alpha", "r", "gamma"}, "model");
      return make_logperturbed(as_number(require(j, "alpha"), "model.alpha"),
                               as_number(require(j, "r"), "model.r"),
                               as_number(require(j, "gamma"), "model.gamma"));
    }
    if (kind == "anomalous") {
      check_keys(j, {"kind", "alpha1", "alpha2"}, "model");
      return make_anomalous(as_number(require(j, "alpha1"), "model.alpha1"),
                            as_number(require(j, "alpha2"), "model.alpha2"));
    }
    if (kind == "degenerate") {
      check_keys(j, {"kind", "value"}, "model");
      return make_degenerate(as_number(require(j, "value"), "model.value"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("model: unknown kind '" + kind + "'");
}

ExperimentKind parse_kind(const std::string& name) {
  if (name == "time-constant") return ExperimentKind::time_constant;
  if (name == "upper-tail") return ExperimentKind::upper_tail;
  if (name == "slab") return ExperimentKind::slab;
  if (name == "sum-tail") return ExperimentKind::sum_tail;
  if (name == "anomalous-scan") return ExperimentKind::anomalous_scan;
  if (name == "dist-check") return ExperimentKind::dist_check;
  throw ConfigError("unknown experiment '" + name + "'");
}

void parse_outputs(const json& j, ExperimentConfig& cfg) {
  if (j.contains("out_csv")) {
    cfg.out_csv = as_string(j["out_csv"], "out_csv");
    if (cfg.out_csv.empty()) throw ConfigError("key 'out_csv' must be nonempty");
  }
  if (j.contains("out_summary")) {
    cfg.out_summary = as_string(j["out_summary"], "out_summary");
    if (cfg.out_summary.empty())
      throw ConfigError("key 'out_summary' must be nonempty");
  }
}

void parse_seed(const json& j, ExperimentConfig& cfg) {
  if (!j.contains("seed")) return;
  const json& v = j["seed"];
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    throw ConfigError("key 'seed' must be a nonnegative integer");
  cfg.seed = v.get<std::uint64_t>();
}

void parse_mu_options(const json& j, ExperimentConfig& cfg) {
  if (j.contains("mu_hat")) {
    double mu = as_number(j["mu_hat"], "mu_hat");
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw ConfigError("key 'mu_hat' must be a positive finite number");
    cfg.mu_hat = mu;
  }
  if (j.contains("mu_std_error")) {
    cfg.mu_std_error = as_number(j["mu_std_error"], "mu_std_error");
    if (!(cfg.mu_std_error >= 0.0) || !std::isfinite(cfg.mu_std_error))
      throw ConfigError("key 'mu_std_error' must be a nonnegative number");
  }
  if (j.contains("mu_replicas"))
    cfg.mu_replicas = as_bounded_int(j["mu_replicas"], "mu_replicas", 30,
                                     100000000);
}

std::int64_t parse_replicas(const json& j, std::int64_t lo) {
  std::int64_t r = as_integer(require(j, "replicas"), "replicas");
  if (r < lo || r > 4000000000LL)
    throw ConfigError("key 'replicas' out of range");
  return r;
}

bool is_tower_square(int n) {
  const TowerSequence tower;
  for (int m = 1; m + 1 < TowerSequence::kCount; ++m) {
    // a_m^2 for m in 1..4 stays below 2^31.
    std::int64_t sq = static_cast<std::int64_t>(tower.values[m]) *
                      static_cast<std::int64_t>(tower.values[m]);
    if (sq == n) return true;
  }
  return false;
}

}  // namespace

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::time_constant: return "time-constant";
    case ExperimentKind::upper_tail: return "upper-tail";
    case ExperimentKind::slab: return "slab";
    case ExperimentKind::sum_tail: return "sum-tail";
    case ExperimentKind::anomalous_scan: return "anomalous-scan";
    case ExperimentKind::dist_check: return "dist-check";
  }
  return "unknown";
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j = parse_json_text(json_text, "config");
  ExperimentConfig cfg;
  cfg.experiment = parse_kind(as_string(require(j, "experiment"), "experiment"));
  cfg.model = parse_model(require(j, "model"));
  parse_seed(j, cfg);
  parse_outputs(j, cfg);

  switch (cfg.experiment) {
    case ExperimentKind::time_constant:
      check_keys(j,
                 {"experiment", "model", "seed", "out_csv", "out_summary",
                  "d", "n_list", "replicas"},
                 "config");
      cfg.d = as_bounded_int(require(j, "d"), "d", 2, 5);
      cfg.n_list = as_n_list(require(j, "n_list"));
      cfg.replicas = parse_replicas(j, 30);
      break;

    case ExperimentKind::upper_tail: {
      check_keys(j,
                 {"experiment", "model", "seed", "out_csv", "out_summary",
                  "d", "n_list", "xi", "replicas", "estimator", "shift",
                  "mixture_weight", "mu_hat", "mu_std_error", "mu_replicas"},
                 "config");
      cfg.d = as_bounded_int(require(j, "d"), "d", 2, 5);
      cfg.n_list = as_n_list(require(j, "n_list"));
      cfg.xi = as_number(require(j, "xi"), "xi");
      if (!(cfg.xi > 0.0) || !std::isfinite(cfg.xi))
        throw ConfigError("key 'xi' must be a positive number");
      cfg.replicas = parse_replicas(j, 1);
      if (j.contains("estimator")) {
        std::string est = as_string(j["estimator"], "estimator");
        if (est == "naive")
          cfg.estimator = EstimatorKind::naive;
        else if (est == "tilted")
          cfg.estimator = EstimatorKind::tilted;
        else
          throw ConfigError("key 'estimator' must be 'naive' or 'tilted'");
      }
      if (j.contains("shift")) {
        double s = as_number(j["shift"], "shift");
        if (!(s > 0.0) || !std::isfinite(s))
          throw ConfigError("key 'shift' must be a positive number");
        cfg.shift = s;
      }
      if (j.contains("mixture_weight")) {
        cfg.mixture_weight = as_number(j["mixture_weight"], "mixture_weight");
        if (!(cfg.mixture_weight > 0.0 && cfg.mixture_weight <= 1.0))
          throw ConfigError("key 'mixture_weight' must lie in (0, 1]");
      }
      parse_mu_options(j, cfg);
      if (std::holds_alternative<DegenerateModel>(cfg.model) &&
          cfg.estimator == EstimatorKind::tilted)
        throw ConfigError("tilted estimator requires a continuous model");
      break;
    }

    case ExperimentKind::slab:
      check_keys(j,
                 {"experiment", "model", "seed", "out_csv", "out_summary",
                  "d", "K", "epsilon", "n_list", "replicas", "mu_hat",
                  "mu_replicas"},
                 "config");
      cfg.d = as_bounded_int(require(j, "d"), "d", 2, 5);
      cfg.K = as_bounded_int(require(j, "K"), "K", 1, (1 << 20) - 1);
      cfg.epsilon = as_number(require(j, "epsilon"), "epsilon");
      if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon))
        throw ConfigError("key 'epsilon' must be a positive number");
      cfg.n_list = as_n_list(require(j, "n_list"));
      if (cfg.n_list.front() < cfg.K)
        throw ConfigError("slab: every n must satisfy n >= K");
      cfg.replicas = parse_replicas(j, 1);
      parse_mu_options(j, cfg);
      break;

    case ExperimentKind::sum_tail:
      check_keys(j,
                 {"experiment", "model", "seed", "out_csv", "out_summary",
                  "k", "n_list", "replicas", "c"},
                 "config");
      cfg.k = as_bounded_int(require(j, "k"), "k", 1, 1000000);
      cfg.n_list = as_n_list(require(j, "n_list"));
      cfg.replicas = parse_replicas(j, 1);
      if (j.contains("c")) {
        cfg.c = as_number(j["c"], "c");
        if (!(cfg.c > 0.0 && cfg.c < 1.0))
          throw ConfigError("key 'c' must lie in (0, 1)");
      }
      break;

    case ExperimentKind::anomalous_scan:
      check_keys(j,
                 {"experiment", "model", "seed", "out_csv", "out_summary",
                  "d", "xi", "n_list"},
                 "config");
      if (!std::holds_alternative<AnomalousModel>(cfg.model))
        throw ConfigError("anomalous-scan requires an anomalous model");
      cfg.d = as_bounded_int(require(j, "d"), "d", 2, 5);
      cfg.xi = as_number(require(j, "xi"), "xi");
      if (!(cfg.xi > 0.0 && cfg.xi <= 1.0))
        throw ConfigError("key 'xi' must lie in (0, 1] for anomalous-scan");
      cfg.n_list = as_n_list(require(j, "n_list"));
      for (int n : cfg.n_list)
        if (!is_tower_square(n))
          throw ConfigError(
              "anomalous-scan: every n must be the square of a tower value");
      break;

    case ExperimentKind::dist_check:
      check_keys(j,
                 {"experiment", "model", "seed", "out_csv", "out_summary",
                  "samples"},
                 "config");
      if (j.contains("samples")) {
        std::int64_t s = as_integer(j["samples"], "samples");
        if (s < 10 || s > 1000000000LL)
          throw ConfigError("key 'samples' out of range");
        cfg.samples = s;
      }
      break;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

EdgeWeightModel parse_model_json(const std::string& json_text) {
  return parse_model(parse_json_text(json_text, "model"));
}

}  // namespace fpp
