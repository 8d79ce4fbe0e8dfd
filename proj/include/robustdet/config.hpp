#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robustdet/spectral.hpp"

namespace robustdet {

enum class Mode { exponent, dominance, simulate, minimax, full };

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view name) noexcept;

struct PsdSpec {
  std::string label;
  PsdParams params;
};

struct ExperimentConfig {
  Mode mode = Mode::exponent;
  std::size_t grid_size = kDefaultGridSize;
  double sigma2 = 1.0;
  double alpha = 0.1;
  std::vector<PsdSpec> psds;
  std::optional<std::string> candidate_label;
  std::vector<std::size_t> n_values{16, 32, 64};
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  std::string output_path;
  double tilt_lo = -2.0;
  std::size_t tilt_points = 41;
  std::size_t optimizer_max_iters = 500;
  double optimizer_tol = 1e-9;
};

// Parses and validates a JSON config document; unknown keys are rejected.
// Errors carry ErrorKind::config and name the offending key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

// Re-checks every cross-field constraint; parse_config calls this, and the
// CLI calls it again after applying overrides.
void validate(const ExperimentConfig& config);

UncertaintySet build_set(const ExperimentConfig& config);

}  // namespace robustdet
