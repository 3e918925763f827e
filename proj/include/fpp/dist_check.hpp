#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fpp/distributions.hpp"

namespace fpp {

// Decay rate of the log-density across one support interval of the
// anomalous model; `expected` is the analytic rate for that interval.
struct IntervalSlope {
  int k = 0;
  double x1 = 0.0, x2 = 0.0;
  double slope = 0.0;
  double expected = 0.0;
};

struct DistCheckReport {
  std::string kind;
  std::int64_t samples = 0;
  double ks_stat = 0.0;

  // Numeric integral of the density over [quad_lo, quad_hi]; tail_mass is
  // the analytic survival at quad_hi (zero for bounded support).
  double quadrature = 1.0;
  double quad_lo = 0.0, quad_hi = 0.0;
  double tail_mass = 0.0;
  bool trivially_exact = false;  // point mass: no density to check

  // Anomalous-only diagnostics: per-interval slopes and the sandwich
  // constants c4, c5 over a fixed grid.
  std::vector<IntervalSlope> slopes;
  double c4 = std::numeric_limits<double>::quiet_NaN();
  double c5 = std::numeric_limits<double>::quiet_NaN();
  bool sandwich_ok = true;
  double grid_lo = 1.0, grid_hi = 100.0;
  int grid_points = 1000;
};

DistCheckReport dist_check(const EdgeWeightModel& model, std::int64_t samples,
                           std::uint64_t seed);

std::string format_report(const DistCheckReport& report);

}  // namespace fpp
