#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fpp/distributions.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

// All estimators are deterministic functions of (inputs, base_seed): replica
// i uses environment seed base_seed + i, work is split into fixed-size
// chunks, and per-chunk partials are folded in chunk-index order, so results
// are bit-identical for any worker count.

struct PerNStat {
  int n = 0;
  double mean = 0.0;       // mean of T(0, n e_1)
  double std_error = 0.0;  // standard error of that mean
};

struct TimeConstantEstimate {
  double mu_hat = 0.0;
  int n_used = 0;
  int replicas = 0;
  double std_error = 0.0;
  std::vector<PerNStat> per_n;
};

// Upper-tail event {T(0, n*direction) > threshold}, threshold = n*(mu_hat +
// xi). xi < 0 is allowed as a diagnostic (threshold below the typical time).
struct TailQuery {
  EdgeWeightModel model;
  int d = 2;
  double xi = 0.0;
  int n = 0;
  double mu_hat = 0.0;
  Site direction = make_site(1, 0);

  double threshold() const { return n * (mu_hat + xi); }
};

enum class EstimatorKind { naive, tilted };

struct TailEstimate {
  double p_hat = 0.0;
  double log_p = 0.0;      // computed in log space; finite even when p_hat
                           // underflows to 0
  double variance = 0.0;   // variance of the estimator itself
  double std_error = 0.0;  // sqrt(variance)
  std::int64_t replicas = 0;
  EstimatorKind kind = EstimatorKind::naive;
  double tilt_shift = 0.0;
  double mixture_weight = 1.0;
  std::int64_t hits = 0;  // replicas with a positive contribution
};

struct RateFit {
  double r = 1.0;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  std::vector<std::pair<double, double>> points;  // (n, log_p)
};

struct SumTailPoint {
  double n = 0.0;
  double p_hat = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // exp(-(1-c) * alpha * n^r); NaN when inapplicable
};

// Kingman plug-in: mu_hat = mean of T(0, n_max e_1)/n_max over `replicas`
// independent environments; per_n reports the mean passage time at every n
// in the ascending n_list from the same runs. Throws if any replica returns
// +inf (impossible on the full lattice).
TimeConstantEstimate estimate_time_constant(const EdgeWeightModel& model,
                                            int d,
                                            const std::vector<int>& n_list,
                                            int replicas,
                                            std::uint64_t base_seed,
                                            int threads = 1);

// Fraction of replicas with T > threshold; exact binomial variance.
TailEstimate naive_tail(const TailQuery& q, std::int64_t replicas,
                        std::uint64_t base_seed, int threads = 1);

// Same sampling pass evaluated at several mu values (thresholds n*(mu+xi)),
// one estimate per value: propagates time-constant uncertainty into the
// rate fit without re-sampling. Element j matches naive_tail with
// mu_hat = mu_values[j] exactly.
std::vector<TailEstimate> naive_tail_at(const TailQuery& q,
                                        std::int64_t replicas,
                                        std::uint64_t base_seed,
                                        const std::vector<double>& mu_values,
                                        int threads = 1);

// Defensive-mixture importance sampling. With probability w a replica
// redraws all 2d origin edges as tau' = tau + shift; the indicator of
// {T > threshold} is weighted by LR = prod f(x_e) / (w prod f(x_e - shift) +
// (1-w) prod f(x_e)) over the origin edges, which is unbiased and satisfies
// LR <= 1/(1-w) for w < 1 (asserted per replica). Aggregation runs in log
// space. Defaults elsewhere: shift = xi*n, w = 0.5.
TailEstimate tilted_tail(const TailQuery& q, double shift,
                         double mixture_weight, std::int64_t replicas,
                         std::uint64_t base_seed, int threads = 1);

// Multi-threshold variant of tilted_tail; see naive_tail_at.
std::vector<TailEstimate> tilted_tail_at(const TailQuery& q, double shift,
                                         double mixture_weight,
                                         std::int64_t replicas,
                                         std::uint64_t base_seed,
                                         const std::vector<double>& mu_values,
                                         int threads = 1);

// Ordinary least squares of log_p against n^r over >= 4 points.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points,
                 double r);

// Same regression with regressor b(n) * n^r (log-perturbed normalization).
RateFit fit_rate_logperturbed(
    const std::vector<std::pair<double, double>>& points,
    const LogPerturbedModel& model);

// Naive MC estimate of P(T_slab(0, n e_1) > (mu_hat + epsilon) n) inside
// slab(0, K, n).
TailEstimate slab_tail(const EdgeWeightModel& model, int d, int K, int n,
                       double epsilon, double mu_hat, std::int64_t replicas,
                       std::uint64_t base_seed, int threads = 1);

// MC estimate of P(sum_{i<k} X_i > n) for i.i.d. model draws, one point per
// n in n_list, paired with the bound exp(-(1-c) alpha n^r). For the
// anomalous model each draw is truncated to its alpha2-governed intervals
// (X kept only when it falls in an even-index tower interval) and the bound
// uses alpha2 with r = 1.
std::vector<SumTailPoint> sum_tail_check(const EdgeWeightModel& model, int k,
                                         const std::vector<int>& n_list,
                                         std::int64_t replicas,
                                         std::uint64_t base_seed,
                                         double c = 0.1, int threads = 1);

}  // namespace fpp
