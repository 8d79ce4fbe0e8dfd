#include "robustdet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "robustdet/errors.hpp"

namespace robustdet {

namespace {

using std::numbers::pi;

void check_values(std::span<const double> values) {
  if (values.size() < kMinGridSize) {
    fail(ErrorKind::parameter, "grid_size must be >= " + std::to_string(kMinGridSize) + ", got " +
                                   std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      fail(ErrorKind::parameter,
           "values[" + std::to_string(i) + "] must be finite and >= 0, got " + std::to_string(values[i]));
    }
  }
}

void require_param(bool ok, const char* field, const std::string& constraint) {
  if (!ok) fail(ErrorKind::parameter, std::string("invalid parameter `") + field + "`: " + constraint);
}

template <class F>
std::vector<double> sample(std::size_t grid_size, F&& f) {
  std::vector<double> v(grid_size);
  const double h = pi / static_cast<double>(grid_size - 1);
  for (std::size_t i = 0; i < grid_size; ++i) v[i] = f(static_cast<double>(i) * h);
  return v;
}

}  // namespace

PsdGrid::PsdGrid(std::vector<double> values, std::string label)
    : values_(std::move(values)), label_(std::move(label)) {
  check_values(values_);
}

double PsdGrid::step() const noexcept { return pi / static_cast<double>(values_.size() - 1); }

double PsdGrid::node(std::size_t i) const noexcept { return static_cast<double>(i) * step(); }

PsdGrid PsdGrid::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return PsdGrid(std::move(v), label_);
}

PsdFamily family_of(const PsdParams& params) noexcept {
  return static_cast<PsdFamily>(params.index());
}

std::string_view to_string(PsdFamily family) noexcept {
  switch (family) {
    case PsdFamily::flat: return "flat";
    case PsdFamily::raised_cosine: return "raised_cosine";
    case PsdFamily::rational_ar1: return "rational_ar1";
    case PsdFamily::tabulated: return "tabulated";
  }
  return "unknown";
}

std::optional<PsdFamily> parse_family(std::string_view name) noexcept {
  for (auto f : {PsdFamily::flat, PsdFamily::raised_cosine, PsdFamily::rational_ar1, PsdFamily::tabulated}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

PsdGrid make_psd(const PsdParams& params, std::size_t grid_size, std::string label) {
  require_param(grid_size >= kMinGridSize, "grid_size", ">= " + std::to_string(kMinGridSize));
  struct Visitor {
    std::size_t m;

    std::vector<double> operator()(const FlatParams& p) const {
      require_param(std::isfinite(p.level) && p.level >= 0.0, "level", "must be >= 0");
      return std::vector<double>(m, p.level);
    }
    std::vector<double> operator()(const RaisedCosineParams& p) const {
      require_param(std::isfinite(p.peak) && p.peak >= 0.0, "peak", "must be >= 0");
      require_param(p.center >= 0.0 && p.center <= pi, "center", "must lie in [0, pi]");
      require_param(std::isfinite(p.width) && p.width > 0.0, "width", "must be > 0");
      return sample(m, [&](double w) {
        const double d = std::abs(w - p.center);
        return d < p.width ? p.peak * 0.5 * (1.0 + std::cos(pi * d / p.width)) : 0.0;
      });
    }
    std::vector<double> operator()(const RationalAr1Params& p) const {
      require_param(std::isfinite(p.variance) && p.variance > 0.0, "variance", "must be > 0");
      require_param(std::isfinite(p.pole) && std::abs(p.pole) < 1.0, "pole", "magnitude must lie in [0, 1)");
      const double a = p.pole;
      return sample(m, [&](double w) {
        return p.variance * (1.0 - a * a) / (1.0 - 2.0 * a * std::cos(w) + a * a);
      });
    }
    std::vector<double> operator()(const TabulatedParams& p) const {
      require_param(p.values.size() == m, "values",
                    "tabulated array must have grid_size = " + std::to_string(m) + " entries, got " +
                        std::to_string(p.values.size()));
      return p.values;
    }
  };
  return PsdGrid(std::visit(Visitor{grid_size}, params), std::move(label));
}

double eval_psd(const PsdGrid& psd, double omega) {
  if (!(omega >= -pi && omega <= pi)) {
    fail(ErrorKind::domain, "omega must lie in [-pi, pi], got " + std::to_string(omega));
  }
  const double x = std::abs(omega) / psd.step();
  const std::size_t last = psd.grid_size() - 1;
  // node(i) / step() can land a few ulps off i; snap those to the node value
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, nearest)) return psd[std::min(static_cast<std::size_t>(nearest), last)];
  const auto i = std::min(static_cast<std::size_t>(x), last);
  if (i == last) return psd[last];
  const double t = x - static_cast<double>(i);
  if (t == 0.0) return psd[i];
  return (1.0 - t) * psd[i] + t * psd[i + 1];
}

UncertaintySet::UncertaintySet(std::vector<PsdGrid> members, std::optional<std::size_t> candidate_index)
    : members_(std::move(members)), candidate_(candidate_index) {
  if (members_.empty()) fail(ErrorKind::argument, "uncertainty set must have at least one member");
  for (const auto& m : members_) require_same_grid(members_.front(), m);
  if (candidate_ && *candidate_ >= members_.size()) {
    fail(ErrorKind::argument, "candidate_index " + std::to_string(*candidate_) + " out of range [0, " +
                                  std::to_string(members_.size()) + ")");
  }
}

std::optional<std::size_t> UncertaintySet::find_label(std::string_view label) const {
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (members_[k].label() == label) return k;
  }
  return std::nullopt;
}

PsdGrid lower_envelope(const UncertaintySet& set) {
  std::vector<double> v(set[0].values().begin(), set[0].values().end());
  for (std::size_t k = 1; k < set.size(); ++k) {
    const auto other = set[k].values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::min(v[i], other[i]);
  }
  return PsdGrid(std::move(v), "envelope");
}

std::vector<double> autocovariance(const PsdGrid& psd, std::size_t max_lag) {
  const auto values = psd.values();
  const std::size_t period = 2 * (values.size() - 1);
  // cos(m * w_i) = cos(((m * i) mod period) * h); tabulating one period keeps
  // the phase exact at large lags.
  std::vector<double> cos_table(period);
  for (std::size_t k = 0; k < period; ++k) cos_table[k] = std::cos(static_cast<double>(k) * psd.step());

  std::vector<double> c(max_lag + 1);
  for (std::size_t m = 0; m <= max_lag; ++m) {
    const std::size_t stride = m % period;
    std::size_t phase = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
      sum += w * values[i] * cos_table[phase];
      phase += stride;
      if (phase >= period) phase -= period;
    }
    c[m] = sum / static_cast<double>(values.size() - 1);
  }
  return c;
}

void require_same_grid(const PsdGrid& a, const PsdGrid& b) {
  if (a.grid_size() != b.grid_size()) {
    fail(ErrorKind::argument, "PSDs '" + a.label() + "' and '" + b.label() + "' have different grid sizes (" +
                                  std::to_string(a.grid_size()) + " vs " + std::to_string(b.grid_size()) + ")");
  }
}

}  // namespace robustdet
