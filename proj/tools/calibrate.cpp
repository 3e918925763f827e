// Calibration probes: prints reference statistics (time constants, slab
// hit rates, tilted-estimator hit counts) used to pin expected values and
// budgets before enabling the long-running checks.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpp/estimators.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void print_mu(const char* label, const fpp::EdgeWeightModel& model, int d,
              const std::vector<int>& n_list, int replicas,
              std::uint64_t seed, int threads) {
  Clock::time_point t0 = Clock::now();
  fpp::TimeConstantEstimate est =
      fpp::estimate_time_constant(model, d, n_list, replicas, seed, threads);
  double dt = secs_since(t0);
  std::printf("%s: replicas=%d seed=%llu (%.1fs)\n", label, replicas,
              static_cast<unsigned long long>(seed), dt);
  for (const fpp::PerNStat& st : est.per_n)
    std::printf("  n=%4d  mean=%.17g  se=%.3g  normalized=%.17g  se/n=%.3g\n",
                st.n, st.mean, st.std_error,
                st.mean / static_cast<double>(st.n),
                st.std_error / static_cast<double>(st.n));
  std::printf("  mu_hat=%.17g  std_error=%.17g\n", est.mu_hat,
              est.std_error);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"calibration probes"};
  std::string mode;
  app.add_option("mode", mode,
                 "mu-r1 | mu-r05 | mu-acc | slab-probe | tilt-probe")
      ->required();
  std::int64_t replicas = 0;
  app.add_option("--replicas", replicas, "override replica count");
  double mu = 0.0;
  app.add_option("--mu", mu, "time constant for slab-probe thresholds");
  int threads = 1;
  app.add_option("--threads", threads);
  std::uint64_t seed = 101;
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  const fpp::EdgeWeightModel r1 = fpp::make_weibull(1.0, 1.0);
  const fpp::EdgeWeightModel r05 = fpp::make_weibull(1.0, 0.5);

  if (mode == "mu-r1") {
    print_mu("weibull(1,1) d=2", r1, 2, {250, 500, 1000},
             replicas > 0 ? static_cast<int>(replicas) : 1000, seed, threads);
  } else if (mode == "mu-r05") {
    print_mu("weibull(1,0.5) d=2", r05, 2, {250, 500, 1000},
             replicas > 0 ? static_cast<int>(replicas) : 1000, seed, threads);
  } else if (mode == "mu-acc") {
    print_mu("weibull(1,1) d=2 small", r1, 2, {50, 100, 200},
             replicas > 0 ? static_cast<int>(replicas) : 200, seed, threads);
    print_mu("weibull(1,0.5) d=2 small", r05, 2, {50, 100, 200},
             replicas > 0 ? static_cast<int>(replicas) : 200, seed, threads);
  } else if (mode == "slab-probe") {
    if (!(mu > 0.0)) {
      std::fprintf(stderr, "slab-probe requires --mu\n");
      return 2;
    }
    std::int64_t reps = replicas > 0 ? replicas : 200000;
    for (int n : {8, 12, 16, 24, 50, 100}) {
      Clock::time_point t0 = Clock::now();
      fpp::TailEstimate e =
          fpp::slab_tail(r1, 2, 8, n, 0.3, mu, reps, seed + n, threads);
      std::printf(
          "slab n=%3d reps=%lld hits=%lld p=%.6g se=%.3g (%.1fs)\n", n,
          static_cast<long long>(reps), static_cast<long long>(e.hits),
          e.p_hat, e.std_error, secs_since(t0));
    }
  } else if (mode == "tilt-probe") {
    std::int64_t reps = replicas > 0 ? replicas : 10000;
    for (const auto& [label, model] :
         {std::pair<const char*, const fpp::EdgeWeightModel&>{"r=1", r1},
          {"r=0.5", r05}}) {
      for (int n : {16, 64}) {
        fpp::TailQuery q;
        q.model = model;
        q.d = 2;
        q.xi = 3.0;
        q.n = n;
        q.mu_hat = mu > 0.0 ? mu : 0.5;
        Clock::time_point t0 = Clock::now();
        fpp::TailEstimate e = fpp::tilted_tail(
            q, q.xi * n, 0.5, reps, seed + static_cast<std::uint64_t>(n),
            threads);
        std::printf(
            "tilt %s n=%3d mu=%.4f reps=%lld hits=%lld log_p=%.6g "
            "p=%.6g rel_se=%.3g (%.1fs)\n",
            label, n, q.mu_hat, static_cast<long long>(reps),
            static_cast<long long>(e.hits), e.log_p, e.p_hat,
            e.p_hat > 0 ? e.std_error / e.p_hat : 0.0, secs_since(t0));
      }
    }
  } else {
    std::fprintf(stderr, "unknown mode '%s'\n", mode.c_str());
    return 2;
  }
  return 0;
}
