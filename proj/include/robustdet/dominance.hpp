#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robustdet/spectral.hpp"

namespace robustdet {

// Smallest admissible value of the log argument 1 + phi*(phi - phi*)/(s2 + phi*)^2.
inline constexpr double kBoundednessFloor = 1e-6;
// Margins in [-kMarginTolerance, 0) count as 0 (quadrature noise).
inline constexpr double kMarginTolerance = 1e-9;
// Two PSDs closer than this at every node are the same PSD.
inline constexpr double kPsdEqualityTolerance = 1e-12;

// Sum over x with p0(x) > 0 of p0(x) * (p2(x)/p0(x)) / (p1(x)/p0(x)).
// P1 is dominated by P2 with respect to P0 iff the result is <= 1.
double discrete_dominance_integral(std::span<const double> p0, std::span<const double> p1,
                                   std::span<const double> p2);

struct DominanceMargin {
  double margin = 0.0;           // nats; -infinity when the log argument is <= 0 somewhere
  double boundedness_min = 1.0;  // minimum of the log argument over the grid
};

// (1/2pi) integral of log(1 + phi*(phi - phi*)/(s2 + phi*)^2).
DominanceMargin sigma2_dominance_margin(const PsdGrid& phi_star, const PsdGrid& phi, double sigma2);

bool margin_nonnegative(double margin) noexcept;

struct DominanceReport {
  std::size_t candidate_index = 0;
  std::string candidate_label;
  double margin = 0.0;  // smallest per-member margin
  double boundedness_min = 1.0;
  bool dominated = false;
  // Some distinct member sits exactly on the margin = 0 boundary (within tolerance).
  bool boundary = false;
  std::vector<double> per_member_margins;
};

DominanceReport dominance_report(const UncertaintySet& set, std::size_t candidate, double sigma2);

struct DominanceSearch {
  std::optional<std::size_t> index;
  // Report for the dominated member, or for the candidate with the largest
  // worst-case margin when no member qualifies.
  DominanceReport report;
  std::vector<DominanceReport> candidates;
};

DominanceSearch find_dominated(const UncertaintySet& set, double sigma2);

// Flat-member exemplification: phi = rho*s2 is dominated if every member
// satisfies (1/2pi) integral log(phi/s2 + (1+2rho)/rho) >= log((1+rho)^2/rho).
bool flat_psd_criterion(const PsdGrid& phi, double rho, double sigma2);

// Low-SNR exemplification: integral phi*^2 <= integral phi* phi.
bool low_snr_criterion(const PsdGrid& phi_star, const PsdGrid& phi);

}  // namespace robustdet
