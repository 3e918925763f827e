#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fpp {

inline constexpr const char* kResultsSchema = "# schema=fpp.results.v1";
inline constexpr const char* kResultsHeader =
    "experiment,model,d,r,alpha,xi,n,estimator,p_hat,stderr,log_p,bound,"
    "seed,walltime_ms";

// One row per (experiment, n, estimator). Absent fields serialize as empty
// columns; doubles round-trip exactly via %.17g.
struct ResultRow {
  std::string experiment;
  std::string model;
  std::optional<int> d;
  std::optional<double> r;
  std::optional<double> alpha;
  std::optional<double> xi;
  std::optional<std::int64_t> n;
  std::string estimator;
  std::optional<double> p_hat;
  std::optional<double> std_error;
  std::optional<double> log_p;
  std::optional<double> bound;
  std::uint64_t seed = 0;
  std::optional<double> walltime_ms;
};

std::string format_double(double x);  // %.17g; inf/-inf/nan spelled out

std::string to_csv_line(const ResultRow& row);
ResultRow parse_csv_line(const std::string& line);

void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows);
// Throws ConfigError on missing file, bad schema line, or bad header.
std::vector<ResultRow> read_results_csv(const std::string& path);

// Byte comparison of two results files ignoring the walltime_ms column.
bool results_equal_modulo_walltime(const std::string& path_a,
                                   const std::string& path_b);

}  // namespace fpp
