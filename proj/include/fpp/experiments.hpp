#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpp/config.hpp"
#include "fpp/results.hpp"

namespace fpp {

struct RunOutput {
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
  std::vector<ResultRow> rows;
  nlohmann::json summary;
};

// Executes one experiment and writes results.csv plus summary.json under
// out_dir. Output bytes are independent of the thread count; the
// walltime_ms column is the only nondeterministic field.
RunOutput run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir,
                         int threads = 1);

}  // namespace fpp
