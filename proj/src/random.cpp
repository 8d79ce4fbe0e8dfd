#include "robustdet/random.hpp"

#include <random>

namespace robustdet {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(parent ^ fnv1a(label)) + splitmix64(index));
}

void fill_standard_normal(std::uint64_t stream, std::uint64_t index, std::span<double> out) {
  std::mt19937_64 engine(splitmix64(stream + splitmix64(index)));
  std::normal_distribution<double> normal;
  for (double& x : out) x = normal(engine);
}

double substream_uniform(std::uint64_t stream, std::uint64_t index) {
  std::mt19937_64 engine(splitmix64(stream ^ splitmix64(index + 0x5851F42D4C957F2DULL)));
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine);
}

}  // namespace robustdet
