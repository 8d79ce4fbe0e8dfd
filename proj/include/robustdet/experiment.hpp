#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "robustdet/config.hpp"

namespace robustdet {

inline constexpr const char* kToolkitVersion = "1.0.0";

struct ReportRecord {
  Mode mode = Mode::exponent;
  std::uint64_t seed = 0;
  std::string toolkit_version = kToolkitVersion;
  double wall_time_ms = 0.0;
  nlohmann::json config;   // resolved config, including fixed module constants
  nlohmann::json payload;  // mode specific; a "series" array feeds the CSV
};

bool operator==(const ReportRecord& a, const ReportRecord& b);

nlohmann::json config_to_json(const ExperimentConfig& config);

// Deterministic in (config, seed) apart from wall_time_ms. Module errors are
// rethrown with the failing stage name prefixed.
ReportRecord run_experiment(const ExperimentConfig& config);

}  // namespace robustdet
