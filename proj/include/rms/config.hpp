#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rms/driver.hpp"
#include "rms/model.hpp"
#include "rms/recurrency.hpp"

namespace rms {

struct ThresholdSpec {
  double u = 0.0;
  std::optional<double> gamma_target;  // set when u was resolved from a target
};

struct LevelGrid {
  double min = 0.0;
  double max = 1.0;
  int count = 2;
  std::vector<double> values() const;
};

// Parsed and fully resolved experiment description. `echo` holds the
// defaults-filled configuration as written back out, so every report carries
// enough to reproduce the run.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  bool seed_given = false;

  ModelSpec model = ModelSpec::ou1d(1.0, 0.01);
  RecurrencySet set = RecurrencySet::half_space(0.0);
  double importance_offset = 0.0;
  std::vector<ThresholdSpec> thresholds;
  std::optional<LevelGrid> level_grid;

  EstimationSettings estimation;
  bool attach_mc = false;
  std::int64_t mc_steps = 10'000'000;
  int mc_batches = 30;
  double quantile_q = 0.05;
  std::int64_t tune_steps = 1'000'000;

  std::string out_dir = ".";
  std::string prefix = "run";
  bool write_json = true;
  bool write_csv = true;

  nlohmann::json echo;
};

// Loads and validates a configuration file. Field problems raise ConfigError
// with the offending path; gamma targets are resolved into thresholds
// through the stationary-covariance oracle (OU kinds only).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const nlohmann::json& j);

}  // namespace rms
