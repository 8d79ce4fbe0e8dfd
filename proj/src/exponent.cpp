#include "robustdet/exponent.hpp"

#include <cmath>

#include "robustdet/errors.hpp"
#include "robustdet/gaussian_model.hpp"

namespace robustdet {

namespace {

double integrand(double phi, double sigma2) {
  const double x = phi / sigma2;
  return std::log1p(x) - x / (1.0 + x);
}

}  // namespace

ExponentValue error_exponent(const PsdGrid& psd, double sigma2, std::size_t refinement) {
  if (!(sigma2 > 0.0)) fail(ErrorKind::domain, "sigma2 must be > 0");
  if (refinement == 0) fail(ErrorKind::argument, "refinement factor must be >= 1");
  double mean = 0.0;
  if (refinement == 1) {
    mean = spectral_mean(psd.grid_size(), [&](std::size_t i) { return integrand(psd[i], sigma2); });
  } else {
    const std::size_t fine = (psd.grid_size() - 1) * refinement + 1;
    mean = spectral_mean(fine, [&](std::size_t j) {
      const std::size_t i = j / refinement;
      const double t = static_cast<double>(j % refinement) / static_cast<double>(refinement);
      const double phi = t == 0.0 ? psd[i] : (1.0 - t) * psd[i] + t * psd[i + 1];
      return integrand(phi, sigma2);
    });
  }
  // (1/4pi) over [-pi, pi] is half the (1/2pi) spectral mean.
  return {0.5 * mean, psd.label(), sigma2};
}

GenieBound genie_bound(const UncertaintySet& set, double sigma2, std::size_t refinement) {
  GenieBound out{error_exponent(set[0], sigma2, refinement).value, 0};
  for (std::size_t k = 1; k < set.size(); ++k) {
    const double v = error_exponent(set[k], sigma2, refinement).value;
    if (v < out.value) out = {v, k};
  }
  return out;
}

double kl_rate(const PsdGrid& psd, double sigma2, std::size_t n) {
  const auto model = build_model(psd, sigma2, n);
  return gaussian_kl(ToeplitzGaussian::white(sigma2, n), model) / static_cast<double>(n);
}

}  // namespace robustdet
