#include "fpp/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fpp/logsum.hpp"
#include "fpp/passage.hpp"

namespace fpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kChunk = 1024;  // fixed: aggregation layout must not
                                       // depend on the worker count

// Runs fn(begin, end, partial) over [0, total) in fixed chunks; partials are
// indexed by chunk so callers can fold them in chunk order.
template <class Partial, class ChunkFn>
std::vector<Partial> run_chunks(std::int64_t total, int threads,
                                ChunkFn&& fn) {
  std::int64_t n_chunks = (total + kChunk - 1) / kChunk;
  std::vector<Partial> partials(static_cast<std::size_t>(n_chunks));
  if (threads <= 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c)
      fn(c * kChunk, std::min(total, (c + 1) * kChunk),
         partials[static_cast<std::size_t>(c)]);
    return partials;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    try {
      while (true) {
        std::int64_t c = next.fetch_add(1);
        if (c >= n_chunks) break;
        fn(c * kChunk, std::min(total, (c + 1) * kChunk),
           partials[static_cast<std::size_t>(c)]);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return partials;
}

double lse2(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

Site scaled_direction(const Site& direction, int n, int d) {
  bool nonzero = false;
  Site target{};
  for (int i = 0; i < d; ++i) {
    if (direction.x[i] != 0) nonzero = true;
    long long c = static_cast<long long>(direction.x[i]) * n;
    if (std::llabs(c) >= kCoordLimit)
      throw std::overflow_error("tail query: target outside coordinate box");
    target.x[i] = static_cast<std::int32_t>(c);
  }
  if (!nonzero)
    throw std::invalid_argument("tail query: direction must be nonzero");
  return target;
}

struct BinomialStats {
  double p_hat;
  double variance;
};

BinomialStats binomial(std::int64_t hits, std::int64_t replicas) {
  double p = static_cast<double>(hits) / static_cast<double>(replicas);
  return {p, p * (1.0 - p) / static_cast<double>(replicas)};
}

}  // namespace

TimeConstantEstimate estimate_time_constant(const EdgeWeightModel& model,
                                            int d,
                                            const std::vector<int>& n_list,
                                            int replicas,
                                            std::uint64_t base_seed,
                                            int threads) {
  if (n_list.empty() || !std::is_sorted(n_list.begin(), n_list.end()) ||
      n_list.front() < 1)
    throw std::invalid_argument(
        "estimate_time_constant: n_list must be ascending and positive");
  if (replicas < 30)
    throw std::invalid_argument("estimate_time_constant: replicas must be >= 30");

  std::vector<Site> targets;
  targets.reserve(n_list.size());
  for (int n : n_list) targets.push_back(make_site(n, 0));

  struct Partial {
    std::vector<double> sum, sumsq;
    bool saw_inf = false;
  };
  auto partials = run_chunks<Partial>(
      replicas, threads,
      [&](std::int64_t begin, std::int64_t end, Partial& p) {
        p.sum.assign(n_list.size(), 0.0);
        p.sumsq.assign(n_list.size(), 0.0);
        for (std::int64_t i = begin; i < end; ++i) {
          Environment env = make_environment(
              d, model, base_seed + static_cast<std::uint64_t>(i));
          std::vector<double> times =
              passage_times_multi(env, Site{}, targets);
          for (std::size_t j = 0; j < times.size(); ++j) {
            if (!(times[j] < kInf)) {
              p.saw_inf = true;
              continue;
            }
            p.sum[j] += times[j];
            p.sumsq[j] += times[j] * times[j];
          }
        }
      });

  std::vector<double> sum(n_list.size(), 0.0), sumsq(n_list.size(), 0.0);
  for (const auto& p : partials) {
    if (p.saw_inf)
      throw std::runtime_error(
          "estimate_time_constant: replica produced an infinite passage time");
    for (std::size_t j = 0; j < n_list.size(); ++j) {
      sum[j] += p.sum[j];
      sumsq[j] += p.sumsq[j];
    }
  }

  double R = static_cast<double>(replicas);
  TimeConstantEstimate est;
  est.replicas = replicas;
  est.n_used = n_list.back();
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    double mean = sum[j] / R;
    double var = std::max(0.0, (sumsq[j] / R - mean * mean) * R / (R - 1.0));
    est.per_n.push_back(
        PerNStat{n_list[j], mean, std::sqrt(var / R)});
  }
  const PerNStat& last = est.per_n.back();
  est.mu_hat = last.mean / est.n_used;
  est.std_error = last.std_error / est.n_used;
  return est;
}

namespace {

std::vector<double> tail_thresholds(const TailQuery& q,
                                    const std::vector<double>& mu_values) {
  if (mu_values.empty())
    throw std::invalid_argument("tail estimator: mu_values nonempty");
  std::vector<double> thresholds;
  thresholds.reserve(mu_values.size());
  for (double mu : mu_values) {
    double t = (mu + q.xi) * static_cast<double>(q.n);
    if (!std::isfinite(t))
      throw std::invalid_argument("tail estimator: threshold must be finite");
    thresholds.push_back(t);
  }
  return thresholds;
}

TailEstimate binomial_estimate(std::int64_t hits, std::int64_t replicas) {
  auto [p, var] = binomial(hits, replicas);
  TailEstimate est;
  est.p_hat = p;
  est.log_p = std::log(p);
  est.variance = var;
  est.std_error = std::sqrt(var);
  est.replicas = replicas;
  est.kind = EstimatorKind::naive;
  est.hits = hits;
  return est;
}

}  // namespace

std::vector<TailEstimate> naive_tail_at(const TailQuery& q,
                                        std::int64_t replicas,
                                        std::uint64_t base_seed,
                                        const std::vector<double>& mu_values,
                                        int threads) {
  if (replicas < 1) throw std::invalid_argument("naive_tail: replicas >= 1");
  Site target = scaled_direction(q.direction, q.n, q.d);
  std::vector<double> thresholds = tail_thresholds(q, mu_values);
  double stop = *std::max_element(thresholds.begin(), thresholds.end());

  auto partials = run_chunks<std::vector<std::int64_t>>(
      replicas, threads,
      [&](std::int64_t begin, std::int64_t end,
          std::vector<std::int64_t>& hits) {
        hits.assign(thresholds.size(), 0);
        for (std::int64_t i = begin; i < end; ++i) {
          PassageQuery pq;
          pq.env = make_environment(
              q.d, q.model, base_seed + static_cast<std::uint64_t>(i));
          pq.source = Site{};
          pq.target = target;
          pq.stop_threshold = stop;
          double time = passage_time(pq).time;
          for (std::size_t j = 0; j < thresholds.size(); ++j)
            if (time > thresholds[j]) ++hits[j];
        }
      });

  std::vector<TailEstimate> out;
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    std::int64_t hits = 0;
    for (const auto& p : partials) hits += p[j];
    out.push_back(binomial_estimate(hits, replicas));
  }
  return out;
}

TailEstimate naive_tail(const TailQuery& q, std::int64_t replicas,
                        std::uint64_t base_seed, int threads) {
  return naive_tail_at(q, replicas, base_seed, {q.mu_hat}, threads)[0];
}

std::vector<TailEstimate> tilted_tail_at(const TailQuery& q, double shift,
                                         double mixture_weight,
                                         std::int64_t replicas,
                                         std::uint64_t base_seed,
                                         const std::vector<double>& mu_values,
                                         int threads) {
  if (!(shift > 0.0)) throw std::invalid_argument("tilted_tail: shift > 0");
  if (!(mixture_weight > 0.0 && mixture_weight <= 1.0))
    throw std::invalid_argument("tilted_tail: mixture weight in (0,1]");
  if (replicas < 1) throw std::invalid_argument("tilted_tail: replicas >= 1");
  if (std::holds_alternative<DegenerateModel>(q.model))
    throw std::invalid_argument("tilted_tail: degenerate model has no density");

  const std::vector<EdgeId> edges = origin_edges(q.d);
  Site target = scaled_direction(q.direction, q.n, q.d);
  std::vector<double> thresholds = tail_thresholds(q, mu_values);
  double stop = *std::max_element(thresholds.begin(), thresholds.end());
  const double w = mixture_weight;
  // LR <= 1/(1-w); the log bound is +inf for w == 1.
  const double log_lr_bound = w < 1.0 ? -std::log1p(-w) : kInf;
  const std::size_t m = thresholds.size();

  struct Partial {
    std::vector<LogSumAccumulator> ls1, ls2;
    std::vector<std::int64_t> hits;
  };
  auto partials = run_chunks<Partial>(
      replicas, threads,
      [&](std::int64_t begin, std::int64_t end, Partial& p) {
        p.ls1.assign(m, LogSumAccumulator{});
        p.ls2.assign(m, LogSumAccumulator{});
        p.hits.assign(m, 0);
        PassageQuery pq;
        for (std::int64_t i = begin; i < end; ++i) {
          Environment env = make_environment(
              q.d, q.model, base_seed + static_cast<std::uint64_t>(i));
          bool tilt =
              rng::uniform_for(env.seed, rng::kTagCoin, 0) < w;
          double lf = 0.0, lfs = 0.0;
          bool fs_zero = false;
          pq.overrides.clear();
          for (const EdgeId& e : edges) {
            double tau = weight(env, e);
            double x = tilt ? tau + shift : tau;
            lf += log_density(q.model, x);
            if (x >= shift)
              lfs += log_density(q.model, x - shift);
            else
              fs_zero = true;
            if (tilt) pq.overrides.emplace_back(e, x);
          }
          double log_mix = lse2(std::log(w) + (fs_zero ? -kInf : lfs),
                                w < 1.0 ? std::log1p(-w) + lf : -kInf);
          double log_lr = lf - log_mix;
          if (log_lr > log_lr_bound + 1e-9)
            throw std::runtime_error(
                "tilted_tail: likelihood ratio exceeded 1/(1-w)");

          pq.env = std::move(env);
          pq.source = Site{};
          pq.target = target;
          pq.stop_threshold = stop;
          double time = passage_time(pq).time;
          for (std::size_t j = 0; j < m; ++j) {
            if (time > thresholds[j]) {
              p.ls1[j].add(log_lr);
              p.ls2[j].add(2.0 * log_lr);
              ++p.hits[j];
            }
          }
        }
      });

  double logR = std::log(static_cast<double>(replicas));
  double R = static_cast<double>(replicas);
  std::vector<TailEstimate> out;
  for (std::size_t j = 0; j < m; ++j) {
    LogSumAccumulator ls1, ls2;
    std::int64_t hits = 0;
    for (const auto& p : partials) {
      ls1.merge(p.ls1[j]);
      ls2.merge(p.ls2[j]);
      hits += p.hits[j];
    }
    TailEstimate est;
    est.log_p = ls1.value() - logR;
    est.p_hat = std::exp(est.log_p);
    double m2 = std::exp(ls2.value() - logR);
    double sample_var =
        replicas > 1
            ? std::max(0.0, (m2 - est.p_hat * est.p_hat) * R / (R - 1.0))
            : 0.0;
    est.variance = sample_var / R;
    est.std_error = std::sqrt(est.variance);
    est.replicas = replicas;
    est.kind = EstimatorKind::tilted;
    est.tilt_shift = shift;
    est.mixture_weight = w;
    est.hits = hits;
    out.push_back(est);
  }
  return out;
}

TailEstimate tilted_tail(const TailQuery& q, double shift,
                         double mixture_weight, std::int64_t replicas,
                         std::uint64_t base_seed, int threads) {
  return tilted_tail_at(q, shift, mixture_weight, replicas, base_seed,
                        {q.mu_hat}, threads)[0];
}

namespace {

RateFit ols(const std::vector<std::pair<double, double>>& points,
            const std::vector<double>& xs, double r) {
  std::size_t m = points.size();
  if (m < 4)
    throw std::invalid_argument("fit_rate: need at least 4 points");
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(points[i].second))
      throw std::invalid_argument("fit_rate: log_p must be finite");
    for (std::size_t j = i + 1; j < m; ++j)
      if (points[i].first == points[j].first)
        throw std::invalid_argument("fit_rate: n values must be distinct");
  }
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xm += xs[i];
    ym += points[i].second;
  }
  xm /= static_cast<double>(m);
  ym /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (points[i].second - ym);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("fit_rate: degenerate regressor");
  RateFit fit;
  fit.r = r;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double resid = points[i].second - (fit.intercept + fit.slope * xs[i]);
    ssr += resid * resid;
  }
  fit.slope_std_error =
      std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  fit.points = points;
  return fit;
}

}  // namespace

RateFit fit_rate(const std::vector<std::pair<double, double>>& points,
                 double r) {
  std::vector<double> xs;
  xs.reserve(points.size());
  for (const auto& [n, lp] : points) xs.push_back(std::pow(n, r));
  return ols(points, xs, r);
}

RateFit fit_rate_logperturbed(
    const std::vector<std::pair<double, double>>& points,
    const LogPerturbedModel& model) {
  std::vector<double> xs;
  xs.reserve(points.size());
  for (const auto& [n, lp] : points)
    xs.push_back(logperturbed_b(model, n) * std::pow(n, model.r));
  return ols(points, xs, model.r);
}

TailEstimate slab_tail(const EdgeWeightModel& model, int d, int K, int n,
                       double epsilon, double mu_hat, std::int64_t replicas,
                       std::uint64_t base_seed, int threads) {
  if (n < K) throw std::invalid_argument("slab_tail: need n >= K");
  if (replicas < 1) throw std::invalid_argument("slab_tail: replicas >= 1");
  std::vector<std::int32_t> v(static_cast<std::size_t>(d) - 1, 0);
  auto [source, target] = slab_endpoints(v, n);
  Region region = Region::slab(v, K, n);
  double threshold = (mu_hat + epsilon) * n;

  auto partials = run_chunks<std::int64_t>(
      replicas, threads,
      [&](std::int64_t begin, std::int64_t end, std::int64_t& hits) {
        hits = 0;
        for (std::int64_t i = begin; i < end; ++i) {
          PassageQuery pq;
          pq.env = make_environment(
              d, model, base_seed + static_cast<std::uint64_t>(i));
          pq.source = source;
          pq.target = target;
          pq.region = region;
          pq.stop_threshold = threshold;
          if (passage_time(pq).time > threshold) ++hits;
        }
      });

  std::int64_t hits = 0;
  for (std::int64_t h : partials) hits += h;
  auto [p, var] = binomial(hits, replicas);
  TailEstimate est;
  est.p_hat = p;
  est.log_p = std::log(p);
  est.variance = var;
  est.std_error = std::sqrt(var);
  est.replicas = replicas;
  est.kind = EstimatorKind::naive;
  est.hits = hits;
  return est;
}

std::vector<SumTailPoint> sum_tail_check(const EdgeWeightModel& model, int k,
                                         const std::vector<int>& n_list,
                                         std::int64_t replicas,
                                         std::uint64_t base_seed, double c,
                                         int threads) {
  if (k < 1) throw std::invalid_argument("sum_tail_check: k >= 1");
  if (n_list.empty())
    throw std::invalid_argument("sum_tail_check: n_list nonempty");
  if (replicas < 1)
    throw std::invalid_argument("sum_tail_check: replicas >= 1");
  const auto* anomalous = std::get_if<AnomalousModel>(&model);

  auto partials = run_chunks<std::vector<std::int64_t>>(
      replicas, threads,
      [&](std::int64_t begin, std::int64_t end,
          std::vector<std::int64_t>& counts) {
        counts.assign(n_list.size(), 0);
        for (std::int64_t i = begin; i < end; ++i) {
          double s = 0.0;
          for (int j = 0; j < k; ++j) {
            double u = rng::uniform_for(
                base_seed, rng::kTagDraw,
                static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(k) +
                    static_cast<std::uint64_t>(j));
            double x = sample(model, u);
            // Draws from odd intervals decay at the slow rate alpha1; the
            // truncated sum keeps only the alpha2-governed contribution.
            if (anomalous != nullptr &&
                anomalous_interval(*anomalous, x) % 2 != 0)
              x = 0.0;
            s += x;
          }
          for (std::size_t m = 0; m < n_list.size(); ++m)
            if (s > static_cast<double>(n_list[m])) ++counts[m];
        }
      });

  std::vector<std::int64_t> counts(n_list.size(), 0);
  for (const auto& p : partials)
    for (std::size_t m = 0; m < n_list.size(); ++m) counts[m] += p[m];

  std::vector<SumTailPoint> out;
  for (std::size_t m = 0; m < n_list.size(); ++m) {
    auto [p, var] = binomial(counts[m], replicas);
    SumTailPoint pt;
    pt.n = static_cast<double>(n_list[m]);
    pt.p_hat = p;
    pt.std_error = std::sqrt(var);
    if (anomalous != nullptr) {
      pt.bound = std::exp(-(1.0 - c) * anomalous->alpha2 * pt.n);
    } else if (std::holds_alternative<DegenerateModel>(model)) {
      pt.bound = std::numeric_limits<double>::quiet_NaN();
    } else {
      pt.bound = std::exp(-(1.0 - c) * model_alpha(model) *
                          std::pow(pt.n, model_r(model)));
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace fpp
