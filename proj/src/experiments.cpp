#include "fpp/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "fpp/dist_check.hpp"
#include "fpp/estimators.hpp"
#include "fpp/rng.hpp"

namespace fpp {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Stream tags for seeds derived from the experiment base seed; replica
// streams inside one estimator call are offset from the derived seed.
constexpr std::uint64_t kSeedMu = 0x6d75;      // time-constant pre-pass
constexpr std::uint64_t kSeedTail = 0x7461696c;  // per-n tail runs
constexpr std::uint64_t kSeedSlab = 0x736c6162;  // per-n slab runs

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0)
      .count();
}

json model_to_json(const EdgeWeightModel& model) {
  json j;
  if (const auto* w = std::get_if<WeibullModel>(&model)) {
    j = {{"kind", "weibull"}, {"alpha", w->alpha}, {"r", w->r}};
  } else if (const auto* lp = std::get_if<LogPerturbedModel>(&model)) {
    j = {{"kind", "logperturbed"},
         {"alpha", lp->alpha},
         {"r", lp->r},
         {"gamma", lp->gamma}};
  } else if (const auto* an = std::get_if<AnomalousModel>(&model)) {
    j = {{"kind", "anomalous"},
         {"alpha1", an->alpha1},
         {"alpha2", an->alpha2}};
  } else {
    j = {{"kind", "degenerate"},
         {"value", std::get<DegenerateModel>(model).value}};
  }
  return j;
}

ResultRow base_row(const ExperimentConfig& cfg) {
  ResultRow row;
  row.experiment = experiment_name(cfg.experiment);
  row.model = model_kind(cfg.model);
  row.seed = cfg.seed;
  if (!std::holds_alternative<DegenerateModel>(cfg.model)) {
    row.r = model_r(cfg.model);
    row.alpha = model_alpha(cfg.model);
  }
  return row;
}

json finite_or_null(double x) {
  return std::isfinite(x) ? json(x) : json();
}

// Resolves the time constant for threshold construction: either pinned in
// the config or estimated with a dedicated seed stream.
struct MuInfo {
  double value = 0.0;
  double std_error = 0.0;
  json detail;
};

MuInfo resolve_mu(const ExperimentConfig& cfg, int threads) {
  MuInfo mu;
  if (cfg.mu_hat) {
    mu.value = *cfg.mu_hat;
    mu.std_error = cfg.mu_std_error;
    mu.detail = {{"source", "config"}, {"value", mu.value}};
    if (mu.std_error > 0.0) mu.detail["std_error"] = mu.std_error;
    return mu;
  }
  int n = cfg.n_list.back();
  TimeConstantEstimate est = estimate_time_constant(
      cfg.model, cfg.d, {n}, cfg.mu_replicas,
      rng::hash_key(cfg.seed, kSeedMu, 0), threads);
  mu.value = est.mu_hat;
  mu.std_error = cfg.mu_std_error > 0.0 ? cfg.mu_std_error : est.std_error;
  mu.detail = {{"source", "estimated"},
               {"value", mu.value},
               {"std_error", mu.std_error},
               {"n", n},
               {"replicas", cfg.mu_replicas}};
  return mu;
}

std::vector<double> mu_grid(const MuInfo& mu) {
  if (mu.std_error > 0.0)
    return {mu.value, mu.value - 2.0 * mu.std_error,
            mu.value + 2.0 * mu.std_error};
  return {mu.value};
}

// Predicted tail probability used for the bound column; empty for models
// whose rate oscillates (anomalous) or is undefined (degenerate).
std::optional<double> predicted_tail(const EdgeWeightModel& model, int d,
                                     double xi, int n) {
  if (const auto* w = std::get_if<WeibullModel>(&model))
    return std::exp(-2.0 * d * w->alpha * std::pow(xi, w->r) *
                    std::pow(n, w->r));
  if (const auto* lp = std::get_if<LogPerturbedModel>(&model))
    return std::exp(-2.0 * d * std::pow(xi, lp->r) * logperturbed_b(*lp, n) *
                    std::pow(n, lp->r));
  return std::nullopt;
}

void fit_into(json& out, const std::vector<std::pair<double, double>>& pts,
              const EdgeWeightModel& model) {
  if (pts.size() < 4 || std::holds_alternative<DegenerateModel>(model)) {
    out = json();
    return;
  }
  try {
    RateFit fit = std::holds_alternative<LogPerturbedModel>(model)
                      ? fit_rate_logperturbed(
                            pts, std::get<LogPerturbedModel>(model))
                      : fit_rate(pts, model_r(model));
    out = {{"slope", fit.slope},
           {"intercept", fit.intercept},
           {"slope_std_error", fit.slope_std_error},
           {"r", fit.r}};
  } catch (const std::invalid_argument&) {
    out = json();  // degenerate points (repeated n or infinite log_p)
  }
}

void run_time_constant(const ExperimentConfig& cfg, int threads,
                       std::vector<ResultRow>& rows, json& summary) {
  if (cfg.replicas > std::numeric_limits<int>::max())
    throw ConfigError("time-constant: replicas out of range");
  Clock::time_point t0 = Clock::now();
  TimeConstantEstimate est = estimate_time_constant(
      cfg.model, cfg.d, cfg.n_list, static_cast<int>(cfg.replicas), cfg.seed,
      threads);
  double ms = ms_since(t0);

  bool subadditive_ok = true;
  json per_n = json::array();
  for (std::size_t i = 0; i < est.per_n.size(); ++i) {
    const PerNStat& st = est.per_n[i];
    double n = static_cast<double>(st.n);
    ResultRow row = base_row(cfg);
    row.d = cfg.d;
    row.n = st.n;
    row.estimator = "mean";
    // p_hat holds the normalized per-n estimate mean T(0, n e1) / n.
    row.p_hat = st.mean / n;
    row.std_error = st.std_error / n;
    row.walltime_ms = ms;
    rows.push_back(row);
    per_n.push_back({{"n", st.n},
                     {"mean", st.mean},
                     {"std_error", st.std_error},
                     {"normalized", st.mean / n}});
    if (i > 0) {
      const PerNStat& prev = est.per_n[i - 1];
      double np = static_cast<double>(prev.n);
      double slack = 2.0 * (prev.std_error / np + st.std_error / n);
      if (st.mean / n > prev.mean / np + slack) subadditive_ok = false;
    }
  }
  summary["mu_hat"] = est.mu_hat;
  summary["std_error"] = est.std_error;
  summary["n_used"] = est.n_used;
  summary["replicas"] = est.replicas;
  summary["per_n"] = per_n;
  summary["subadditive_ok"] = subadditive_ok;
  summary["walltime_ms"] = ms;
}

void run_upper_tail(const ExperimentConfig& cfg, int threads,
                    std::vector<ResultRow>& rows, json& summary) {
  MuInfo mu = resolve_mu(cfg, threads);
  std::vector<double> mus = mu_grid(mu);
  bool spread = mus.size() == 3;

  std::vector<std::pair<double, double>> fit_mid, fit_lo, fit_hi;
  json points = json::array();
  double shift_used = 0.0;
  for (int n : cfg.n_list) {
    TailQuery q;
    q.model = cfg.model;
    q.d = cfg.d;
    q.xi = cfg.xi;
    q.n = n;
    q.mu_hat = mu.value;
    std::uint64_t seed_n =
        rng::hash_key(cfg.seed, kSeedTail, static_cast<std::uint64_t>(n));

    Clock::time_point t0 = Clock::now();
    std::vector<TailEstimate> ests;
    if (cfg.estimator == EstimatorKind::naive) {
      ests = naive_tail_at(q, cfg.replicas, seed_n, mus, threads);
    } else {
      double shift = cfg.shift ? *cfg.shift : cfg.xi * n;
      shift_used = shift;
      ests = tilted_tail_at(q, shift, cfg.mixture_weight, cfg.replicas,
                            seed_n, mus, threads);
    }
    double ms = ms_since(t0);

    const TailEstimate& e = ests[0];
    ResultRow row = base_row(cfg);
    row.d = cfg.d;
    row.xi = cfg.xi;
    row.n = n;
    row.estimator = cfg.estimator == EstimatorKind::naive ? "naive" : "tilted";
    row.p_hat = e.p_hat;
    row.std_error = e.std_error;
    row.log_p = e.log_p;
    row.bound = predicted_tail(cfg.model, cfg.d, cfg.xi, n);
    row.walltime_ms = ms;
    rows.push_back(row);

    json pt = {{"n", n},
               {"threshold", q.threshold()},
               {"p_hat", e.p_hat},
               {"std_error", e.std_error},
               {"log_p", finite_or_null(e.log_p)},
               {"hits", e.hits},
               {"replicas", e.replicas},
               {"walltime_ms", ms}};
    if (cfg.estimator == EstimatorKind::tilted) {
      pt["shift"] = e.tilt_shift;
      pt["mixture_weight"] = e.mixture_weight;
    }
    if (spread) {
      pt["p_hat_mu_low"] = ests[1].p_hat;
      pt["p_hat_mu_high"] = ests[2].p_hat;
    }
    points.push_back(pt);

    double nn = static_cast<double>(n);
    if (std::isfinite(e.log_p)) fit_mid.emplace_back(nn, e.log_p);
    if (spread) {
      if (std::isfinite(ests[1].log_p)) fit_lo.emplace_back(nn, ests[1].log_p);
      if (std::isfinite(ests[2].log_p)) fit_hi.emplace_back(nn, ests[2].log_p);
    }
  }

  summary["mu"] = mu.detail;
  summary["estimator"] =
      cfg.estimator == EstimatorKind::naive ? "naive" : "tilted";
  if (cfg.estimator == EstimatorKind::tilted) {
    summary["mixture_weight"] = cfg.mixture_weight;
    summary["shift"] =
        cfg.shift ? json(*cfg.shift)
                  : json("xi*n (last: " + format_double(shift_used) + ")");
  }
  summary["points"] = points;
  fit_into(summary["fit"], fit_mid, cfg.model);

  // Predicted asymptotic slope of log p against the fit regressor: n^r with
  // coefficient -2 d alpha xi^r, or b(n) n^r with coefficient -2 d xi^r.
  if (const auto* w = std::get_if<WeibullModel>(&cfg.model))
    summary["target_slope"] = -2.0 * cfg.d * w->alpha * std::pow(cfg.xi, w->r);
  else if (const auto* lp = std::get_if<LogPerturbedModel>(&cfg.model))
    summary["target_slope"] = -2.0 * cfg.d * std::pow(cfg.xi, lp->r);
  if (summary.contains("target_slope") && !summary["fit"].is_null()) {
    double target = summary["target_slope"].get<double>();
    double slope = summary["fit"]["slope"].get<double>();
    summary["relative_slope_error"] =
        std::abs(slope - target) / std::abs(target);
  }
  if (spread) {
    json flo, fhi;
    fit_into(flo, fit_lo, cfg.model);
    fit_into(fhi, fit_hi, cfg.model);
    json sp = {{"fit_mu_low", flo}, {"fit_mu_high", fhi}};
    if (!flo.is_null() && !fhi.is_null() && !summary["fit"].is_null()) {
      double mid = summary["fit"]["slope"].get<double>();
      sp["max_slope_deviation"] =
          std::max(std::abs(flo["slope"].get<double>() - mid),
                   std::abs(fhi["slope"].get<double>() - mid));
    }
    summary["slope_spread"] = sp;
  }
}

void run_slab(const ExperimentConfig& cfg, int threads,
              std::vector<ResultRow>& rows, json& summary) {
  MuInfo mu = resolve_mu(cfg, threads);
  json points = json::array();
  std::vector<double> log_ps;
  for (int n : cfg.n_list) {
    std::uint64_t seed_n =
        rng::hash_key(cfg.seed, kSeedSlab, static_cast<std::uint64_t>(n));
    Clock::time_point t0 = Clock::now();
    TailEstimate e = slab_tail(cfg.model, cfg.d, cfg.K, n, cfg.epsilon,
                               mu.value, cfg.replicas, seed_n, threads);
    double ms = ms_since(t0);

    ResultRow row = base_row(cfg);
    row.d = cfg.d;
    row.xi = cfg.epsilon;  // threshold excess: (mu + epsilon) * n
    row.n = n;
    row.estimator = "naive";
    row.p_hat = e.p_hat;
    row.std_error = e.std_error;
    row.log_p = e.log_p;
    row.walltime_ms = ms;
    rows.push_back(row);

    points.push_back({{"n", n},
                      {"threshold", (mu.value + cfg.epsilon) * n},
                      {"p_hat", e.p_hat},
                      {"std_error", e.std_error},
                      {"log_p", finite_or_null(e.log_p)},
                      {"hits", e.hits},
                      {"replicas", e.replicas},
                      {"walltime_ms", ms}});
    log_ps.push_back(e.log_p);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < log_ps.size(); ++i)
    if (!(log_ps[i] < log_ps[i - 1])) decreasing = false;

  summary["K"] = cfg.K;
  summary["epsilon"] = cfg.epsilon;
  summary["mu"] = mu.detail;
  summary["points"] = points;
  summary["log_p_strictly_decreasing"] = decreasing;
}

void run_sum_tail(const ExperimentConfig& cfg, int threads,
                  std::vector<ResultRow>& rows, json& summary) {
  Clock::time_point t0 = Clock::now();
  std::vector<SumTailPoint> pts = sum_tail_check(
      cfg.model, cfg.k, cfg.n_list, cfg.replicas, cfg.seed, cfg.c, threads);
  double ms = ms_since(t0);

  json points = json::array();
  bool all_below = true;
  for (const SumTailPoint& pt : pts) {
    ResultRow row = base_row(cfg);
    row.n = static_cast<std::int64_t>(pt.n);
    row.estimator = "naive";
    row.p_hat = pt.p_hat;
    row.std_error = pt.std_error;
    row.log_p = std::log(pt.p_hat);
    if (std::isfinite(pt.bound)) row.bound = pt.bound;
    row.walltime_ms = ms;
    rows.push_back(row);

    points.push_back({{"n", pt.n},
                      {"p_hat", pt.p_hat},
                      {"std_error", pt.std_error},
                      {"bound", finite_or_null(pt.bound)}});
    if (std::isfinite(pt.bound) && pt.p_hat > pt.bound) all_below = false;
  }
  summary["k"] = cfg.k;
  summary["c"] = cfg.c;
  summary["replicas"] = cfg.replicas;
  summary["points"] = points;
  summary["all_below_bound"] = all_below;
  summary["first_point_positive"] = !pts.empty() && pts.front().p_hat > 0.0;
  summary["walltime_ms"] = ms;
}

void run_anomalous_scan(const ExperimentConfig& cfg, int threads,
                        std::vector<ResultRow>& rows, json& summary) {
  (void)threads;  // analytic: nothing to parallelize
  const auto& am = std::get<AnomalousModel>(cfg.model);
  json points = json::array();
  bool all_match = true;
  for (int n : cfg.n_list) {
    int m = 0;
    for (int i = 1; i + 1 < TowerSequence::kCount; ++i)
      if (static_cast<std::int64_t>(am.tower.values[i]) *
              am.tower.values[i] ==
          n)
        m = i;
    double s = cfg.xi * static_cast<double>(n);
    int k = anomalous_interval(am, s);
    bool even = k % 2 == 0;
    double rate = even ? am.alpha2 : am.alpha1;
    bool matches = k == m;
    all_match = all_match && matches;

    ResultRow row = base_row(cfg);
    row.d = cfg.d;
    row.xi = cfg.xi;
    row.n = n;
    row.estimator = "analytic";
    row.p_hat = survival(cfg.model, s);
    row.log_p = log_survival(cfg.model, s);
    rows.push_back(row);

    points.push_back({{"n", n},
                      {"m", m},
                      {"s", s},
                      {"interval", k},
                      {"interval_matches_m", matches},
                      {"regime", even ? "alpha2" : "alpha1"},
                      {"rate", rate},
                      {"target_rate", -2.0 * cfg.d * rate * cfg.xi},
                      {"log_survival", finite_or_null(log_survival(
                                           cfg.model, s))}});
  }
  summary["xi"] = cfg.xi;
  summary["points"] = points;
  summary["all_intervals_match"] = all_match;
}

void run_dist_check(const ExperimentConfig& cfg, json& summary) {
  Clock::time_point t0 = Clock::now();
  DistCheckReport rep = dist_check(cfg.model, cfg.samples, cfg.seed);
  double ms = ms_since(t0);
  summary["samples"] = rep.samples;
  summary["trivially_exact"] = rep.trivially_exact;
  summary["ks_stat"] = rep.ks_stat;
  summary["quadrature"] = {{"value", rep.quadrature},
                           {"lo", rep.quad_lo},
                           {"hi", rep.quad_hi},
                           {"tail_mass", rep.tail_mass}};
  if (!rep.slopes.empty()) {
    json slopes = json::array();
    for (const IntervalSlope& s : rep.slopes)
      slopes.push_back({{"k", s.k},
                        {"x1", s.x1},
                        {"x2", s.x2},
                        {"slope", s.slope},
                        {"expected", s.expected}});
    summary["interval_slopes"] = slopes;
    summary["c4"] = rep.c4;
    summary["c5"] = rep.c5;
    summary["sandwich_ok"] = rep.sandwich_ok;
    summary["sandwich_grid"] = {{"lo", rep.grid_lo},
                                {"hi", rep.grid_hi},
                                {"points", rep.grid_points}};
  }
  summary["walltime_ms"] = ms;
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir, int threads) {
  if (threads < 1) threads = 1;
  std::vector<ResultRow> rows;
  json summary;
  summary["schema"] = "fpp.summary.v1";
  summary["experiment"] = experiment_name(cfg.experiment);
  summary["model"] = model_to_json(cfg.model);
  summary["seed"] = cfg.seed;

  switch (cfg.experiment) {
    case ExperimentKind::time_constant:
      run_time_constant(cfg, threads, rows, summary);
      break;
    case ExperimentKind::upper_tail:
      run_upper_tail(cfg, threads, rows, summary);
      break;
    case ExperimentKind::slab:
      run_slab(cfg, threads, rows, summary);
      break;
    case ExperimentKind::sum_tail:
      run_sum_tail(cfg, threads, rows, summary);
      break;
    case ExperimentKind::anomalous_scan:
      run_anomalous_scan(cfg, threads, rows, summary);
      break;
    case ExperimentKind::dist_check:
      run_dist_check(cfg, summary);
      break;
  }

  std::filesystem::create_directories(out_dir);
  RunOutput out;
  out.csv_path = out_dir / cfg.out_csv;
  out.summary_path = out_dir / cfg.out_summary;
  out.rows = std::move(rows);
  out.summary = std::move(summary);
  write_results_csv(out.csv_path.string(), out.rows);
  std::ofstream sf(out.summary_path, std::ios::binary);
  if (!sf)
    throw std::runtime_error("cannot write summary file: " +
                             out.summary_path.string());
  sf << out.summary.dump(2) << '\n';
  if (!sf)
    throw std::runtime_error("write failed: " + out.summary_path.string());
  return out;
}

}  // namespace fpp
