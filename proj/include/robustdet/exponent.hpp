#pragma once

#include <cstddef>
#include <string>

#include "robustdet/spectral.hpp"

namespace robustdet {

struct ExponentValue {
  double value = 0.0;  // nats per sample
  std::string psd_label;
  double sigma2 = 1.0;
};

// (1/4pi) integral of log(1 + x) - x/(1 + x), x = phi/s2. With refinement
// r > 1 the integrand is evaluated on a grid r times finer, interpolating phi
// linearly between nodes.
ExponentValue error_exponent(const PsdGrid& psd, double sigma2, std::size_t refinement = 1);

struct GenieBound {
  double value = 0.0;
  std::size_t argmin_index = 0;
};

// Smallest matched-detector exponent over the set (first index on ties).
GenieBound genie_bound(const UncertaintySet& set, double sigma2, std::size_t refinement = 1);

// (1/n) D(N(0, s2 I) || N(0, s2 I + Sigma_n)).
double kl_rate(const PsdGrid& psd, double sigma2, std::size_t n);

}  // namespace robustdet
