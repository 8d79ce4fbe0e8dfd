#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace robustdet {

// Stable labeled splitting: the same (parent, label, index) always yields
// the same child seed.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label, std::uint64_t index = 0) noexcept;

// Fills `out` with standard normal draws from substream `index` of `stream`.
// Trial t of any sampler consumes exactly out.size() draws from substream t,
// so results do not depend on how trials are blocked or scheduled.
void fill_standard_normal(std::uint64_t stream, std::uint64_t index, std::span<double> out);

// Uniform draw in [0, 1) from substream `index` of `stream`.
double substream_uniform(std::uint64_t stream, std::uint64_t index);

}  // namespace robustdet
