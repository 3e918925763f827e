#include "fpp/dist_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fpp/quadrature.hpp"
#include "fpp/rng.hpp"

namespace fpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ks_statistic(const EdgeWeightModel& model, std::int64_t samples,
                    std::uint64_t seed) {
  std::vector<double> xs(static_cast<std::size_t>(samples));
  for (std::int64_t i = 0; i < samples; ++i)
    xs[static_cast<std::size_t>(i)] = sample(
        model, rng::uniform_for(seed, rng::kTagSample,
                                static_cast<std::uint64_t>(i)));
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(samples);
  double d = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    double cdf = 1.0 - survival(model, xs[static_cast<std::size_t>(i)]);
    d = std::max(d, cdf - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - cdf);
  }
  return d;
}

// Integrates the density of an unbounded model under u = t^r, which removes
// the integrable singularity at zero. The cutoff T satisfies
// survival(T) < 1e-13.
void quadrature_unbounded(const EdgeWeightModel& model, double r,
                          DistCheckReport& rep) {
  double t_hi = 1.0;
  while (survival(model, t_hi) > 1e-13) {
    t_hi *= 2.0;
    if (t_hi > 1e18)
      throw std::runtime_error("dist_check: survival does not decay");
  }
  const double t_lo = 1e-280;
  double u_lo = std::pow(t_lo, r), u_hi = std::pow(t_hi, r);
  auto g = [&](double u) {
    double t = std::pow(u, 1.0 / r);
    return density(model, t) * std::pow(u, 1.0 / r - 1.0) / r;
  };
  rep.quadrature = integrate(g, u_lo, u_hi, 1e-13);
  rep.quad_lo = t_lo;
  rep.quad_hi = t_hi;
  rep.tail_mass = survival(model, t_hi);
}

void quadrature_anomalous(const AnomalousModel& m, DistCheckReport& rep) {
  const EdgeWeightModel model = m;
  double total = 0.0;
  for (int k = 0; k < 5; ++k) {
    double lo = static_cast<double>(m.tower.values[k]);
    double hi = static_cast<double>(m.tower.values[k + 1]);
    total += integrate([&](double x) { return density(model, x); }, lo, hi,
                       2e-13);
  }
  rep.quadrature = total;
  rep.quad_lo = 0.0;
  rep.quad_hi = static_cast<double>(m.tower.values[5]);
  rep.tail_mass = 0.0;
}

double interval_rate(const AnomalousModel& m, int k) {
  return k % 2 == 0 ? m.alpha2 : m.alpha1;
}

// Measures the log-density decay rate away from interval endpoints; the
// span cap keeps rate * x small enough that the density stays normal.
void anomalous_slopes(const AnomalousModel& m, DistCheckReport& rep) {
  const EdgeWeightModel model = m;
  for (int k = 0; k < 5; ++k) {
    double lo = static_cast<double>(m.tower.values[k]);
    double hi = static_cast<double>(m.tower.values[k + 1]);
    double rate = interval_rate(m, k);
    double span = std::min(hi - lo, 400.0 / rate);
    IntervalSlope s;
    s.k = k;
    s.x1 = lo + 0.25 * span;
    s.x2 = lo + 0.75 * span;
    s.expected = rate;
    double f1 = density(model, s.x1), f2 = density(model, s.x2);
    if (f1 > 0.0 && f2 > 0.0 && std::isfinite(f1) && std::isfinite(f2))
      s.slope = (std::log(f1) - std::log(f2)) / (s.x2 - s.x1);
    else
      s.slope = (log_density(model, s.x1) - log_density(model, s.x2)) /
                (s.x2 - s.x1);
    rep.slopes.push_back(s);
  }
}

void anomalous_sandwich(const AnomalousModel& m, DistCheckReport& rep) {
  const EdgeWeightModel model = m;
  double log_c4 = kInf, log_c5 = -kInf;
  const int pts = rep.grid_points;
  for (int i = 0; i < pts; ++i) {
    double t = rep.grid_lo + (rep.grid_hi - rep.grid_lo) *
                                 static_cast<double>(i) /
                                 static_cast<double>(pts - 1);
    double ls = log_survival(model, t);
    log_c4 = std::min(log_c4, ls + m.alpha2 * t);
    log_c5 = std::max(log_c5, ls + m.alpha1 * t);
  }
  rep.c4 = std::exp(log_c4);
  rep.c5 = std::exp(log_c5);
  rep.sandwich_ok = true;
  for (int i = 0; i < pts; ++i) {
    double t = rep.grid_lo + (rep.grid_hi - rep.grid_lo) *
                                 static_cast<double>(i) /
                                 static_cast<double>(pts - 1);
    double ls = log_survival(model, t);
    if (log_c4 - m.alpha2 * t > ls + 1e-12 ||
        ls > log_c5 - m.alpha1 * t + 1e-12)
      rep.sandwich_ok = false;
  }
}

}  // namespace

DistCheckReport dist_check(const EdgeWeightModel& model, std::int64_t samples,
                           std::uint64_t seed) {
  if (samples < 10)
    throw std::invalid_argument("dist_check: need at least 10 samples");
  DistCheckReport rep;
  rep.kind = model_kind(model);
  rep.samples = samples;

  if (std::holds_alternative<DegenerateModel>(model)) {
    rep.trivially_exact = true;  // point mass: cdf checks are vacuous
    rep.ks_stat = 0.0;
    rep.quadrature = 1.0;
    return rep;
  }

  rep.ks_stat = ks_statistic(model, samples, seed);
  if (const auto* m = std::get_if<AnomalousModel>(&model)) {
    quadrature_anomalous(*m, rep);
    anomalous_slopes(*m, rep);
    anomalous_sandwich(*m, rep);
  } else {
    quadrature_unbounded(model, model_r(model), rep);
  }
  return rep;
}

std::string format_report(const DistCheckReport& rep) {
  std::ostringstream out;
  out.precision(15);
  out << "model: " << rep.kind << "\n";
  if (rep.trivially_exact) {
    out << "point mass: distribution checks are trivially exact\n";
    return out.str();
  }
  out << "samples: " << rep.samples << "\n"
      << "ks_stat: " << rep.ks_stat << "\n"
      << "quadrature: " << rep.quadrature << " over [" << rep.quad_lo << ", "
      << rep.quad_hi << "], tail mass " << rep.tail_mass << "\n";
  for (const IntervalSlope& s : rep.slopes)
    out << "interval " << s.k << ": log-density slope " << s.slope
        << " (expected " << s.expected << ") on [" << s.x1 << ", " << s.x2
        << "]\n";
  if (!rep.slopes.empty())
    out << "sandwich on [" << rep.grid_lo << ", " << rep.grid_hi
        << "]: c4 = " << rep.c4 << ", c5 = " << rep.c5 << ", "
        << (rep.sandwich_ok ? "holds" : "VIOLATED") << "\n";
  return out.str();
}

}  // namespace fpp
