#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace robustdet {

inline constexpr std::size_t kDefaultGridSize = 4096;
inline constexpr std::size_t kMinGridSize = 8;

// A nonnegative PSD sampled on the uniform half-grid w_i = i*pi/(M-1),
// i = 0..M-1. The PSD on [-pi, 0) is the even extension and is never stored.
class PsdGrid {
 public:
  PsdGrid(std::vector<double> values, std::string label = {});

  std::size_t grid_size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::string& label() const noexcept { return label_; }

  double step() const noexcept;
  double node(std::size_t i) const noexcept;

  PsdGrid relabeled(std::string label) const { return PsdGrid(values_, std::move(label)); }
  PsdGrid scaled(double factor) const;

 private:
  std::vector<double> values_;
  std::string label_;
};

struct FlatParams {
  double level = 0.0;
};

struct RaisedCosineParams {
  double peak = 0.0;
  double center = 0.0;
  double width = 1.0;
};

struct RationalAr1Params {
  double variance = 1.0;
  double pole = 0.0;
};

struct TabulatedParams {
  std::vector<double> values;
};

using PsdParams = std::variant<FlatParams, RaisedCosineParams, RationalAr1Params, TabulatedParams>;

enum class PsdFamily { flat, raised_cosine, rational_ar1, tabulated };

PsdFamily family_of(const PsdParams& params) noexcept;
std::string_view to_string(PsdFamily family) noexcept;
std::optional<PsdFamily> parse_family(std::string_view name) noexcept;

// Samples a parametric family on a grid of `grid_size` nodes. For `tabulated`
// the array length must equal grid_size.
PsdGrid make_psd(const PsdParams& params, std::size_t grid_size = kDefaultGridSize,
                 std::string label = {});

// Linear interpolation in |omega|; omega must lie in [-pi, pi].
double eval_psd(const PsdGrid& psd, double omega);

// K >= 1 PSDs on a shared grid, optionally tagged with the putative
// dominated member.
class UncertaintySet {
 public:
  explicit UncertaintySet(std::vector<PsdGrid> members,
                          std::optional<std::size_t> candidate_index = std::nullopt);

  std::size_t size() const noexcept { return members_.size(); }
  std::size_t grid_size() const noexcept { return members_.front().grid_size(); }
  const PsdGrid& operator[](std::size_t k) const { return members_[k]; }
  const std::vector<PsdGrid>& members() const noexcept { return members_; }
  std::optional<std::size_t> candidate_index() const noexcept { return candidate_; }

  std::optional<std::size_t> find_label(std::string_view label) const;

 private:
  std::vector<PsdGrid> members_;
  std::optional<std::size_t> candidate_;
};

PsdGrid lower_envelope(const UncertaintySet& set);

// c[m] = (1/2pi) * integral of phi(w) cos(m w) over [-pi, pi], m = 0..max_lag.
std::vector<double> autocovariance(const PsdGrid& psd, std::size_t max_lag);

// (1/2pi) * integral over [-pi, pi] of a function sampled at the half-grid
// nodes: composite trapezoid with the endpoints half-weighted. `at` is called
// with node indices in increasing order.
template <class F>
double spectral_mean(std::size_t grid_size, F&& at) {
  // Neumaier-compensated; the grids are long enough for plain summation to
  // lose a few digits on constant integrands.
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x = (i == 0 || i + 1 == grid_size) ? 0.5 * at(i) : at(i);
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return (sum + carry) / static_cast<double>(grid_size - 1);
}

void require_same_grid(const PsdGrid& a, const PsdGrid& b);

}  // namespace robustdet
