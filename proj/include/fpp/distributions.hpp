#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>

namespace fpp {

// Tower sequence a_0 = 0, a_{n+1} = 2^{a_n}: 0, 1, 2, 4, 16, 65536.
// a_6 = 2^65536 overflows every fixed-width type and cannot be stored;
// requesting it is an error.
struct TowerSequence {
  static constexpr int kCount = 6;
  std::array<std::int64_t, kCount> values{0, 1, 2, 4, 16, 65536};
};

// a_n for 0 <= n <= 5. Throws std::domain_error beyond the stored range.
std::int64_t tower(int n);

// survival(t) = exp(-alpha * t^r), exactly, for all t >= 0.
struct WeibullModel {
  double alpha;  // tail rate, > 0
  double r;      // stretch exponent, in (0,1]
};

// survival(t) = exp(-b(t) * t^r) with b(t) = alpha * (1 + gamma/ln(e+t)).
// b is slowly varying with b(t) -> alpha. gamma > -1 keeps b positive;
// the constructor additionally verifies that t -> b(t) t^r is increasing.
struct LogPerturbedModel {
  double alpha;  // > 0
  double r;      // in (0,1)
  double gamma;  // > -1
};

// Piecewise-exponential density c3*exp(-alpha2*x) on [a_{2n}, a_{2n+1}) and
// c3*exp(-alpha1*x) on [a_{2n-1}, a_{2n}), truncated at a_5. alpha1 >= 0.012
// is required so that exp(-alpha1 * a_5) underflows to exactly 0.0 and the
// truncation is exact at double precision.
struct AnomalousModel {
  double alpha1;  // 0 < alpha1 < alpha2
  double alpha2;
  TowerSequence tower;
  double c3;                              // normalization
  std::array<double, 5> interval_masses;  // one per tower interval
  std::array<double, 5> mass_before;      // cumulative mass below a_k
  std::array<double, 5> mass_beyond;      // mass at or above a_{k+1}
};

// Every sample equals value exactly. value > 0 (an atom at 0 would violate
// the percolation condition all other models satisfy vacuously).
struct DegenerateModel {
  double value;
};

using EdgeWeightModel =
    std::variant<WeibullModel, LogPerturbedModel, AnomalousModel,
                 DegenerateModel>;

WeibullModel make_weibull(double alpha, double r);
LogPerturbedModel make_logperturbed(double alpha, double r, double gamma);
AnomalousModel make_anomalous(double alpha1, double alpha2);
DegenerateModel make_degenerate(double value);

// c3 and per-interval masses for the anomalous density. c3 = 1/Z with
// Z = sum_k (e^{-a(k) a_k} - e^{-a(k) a_{k+1}})/a(k), a(k) alternating
// alpha2 (k even) / alpha1 (k odd) over the five stored intervals.
std::pair<double, std::array<double, 5>> normalize_anomalous(
    double alpha1, double alpha2, const TowerSequence& tower);

// P(tau > t). Non-increasing in t, survival(0) = 1 for continuous models.
double survival(const EdgeWeightModel& m, double t);

// ln P(tau > t), computed analytically (finite even where survival
// underflows; -inf where survival is exactly 0).
double log_survival(const EdgeWeightModel& m, double t);

// CDF derivative. Rejects DegenerateModel.
double density(const EdgeWeightModel& m, double x);

// ln density. Rejects DegenerateModel; -inf where density is 0.
double log_density(const EdgeWeightModel& m, double x);

// The t with CDF(t) = u, for u in (0,1). Monotone in u;
// survival(quantile(u)) = 1-u to 1e-10 relative.
double quantile(const EdgeWeightModel& m, double u);

// Inverse-CDF sampling: identical to quantile(m, uniform).
double sample(const EdgeWeightModel& m, double uniform);

// b(t) for the log-perturbed family.
double logperturbed_b(const LogPerturbedModel& m, double t);

// Index k with a_k <= x < a_{k+1}; 5 for x at or beyond a_5. Even indices
// carry the alpha2 (fast) rate, odd indices the alpha1 (slow) rate.
int anomalous_interval(const AnomalousModel& m, double x);

// Kind tag as used by the config grammar and the results CSV.
std::string model_kind(const EdgeWeightModel& m);

// Stretch exponent r of the model's tail: r for Weibull/LogPerturbed,
// 1 for Anomalous (exponential-type envelopes). No value for Degenerate.
double model_r(const EdgeWeightModel& m);

// Leading tail rate: alpha for Weibull/LogPerturbed, alpha1 for Anomalous.
double model_alpha(const EdgeWeightModel& m);

}  // namespace fpp
