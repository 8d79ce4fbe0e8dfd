#include "robustdet/dominance.hpp"

#include <algorithm>
#include <cmath>

#include "robustdet/errors.hpp"

namespace robustdet {

namespace {

void check_pmf(std::span<const double> p, const char* name) {
  double total = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) fail(ErrorKind::argument, std::string(name) + " has a negative or non-finite mass");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    fail(ErrorKind::argument, std::string(name) + " does not sum to 1 (sum = " + std::to_string(total) + ")");
  }
}

double max_abs_difference(const PsdGrid& a, const PsdGrid& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.grid_size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

double discrete_dominance_integral(std::span<const double> p0, std::span<const double> p1,
                                   std::span<const double> p2) {
  if (p0.size() != p1.size() || p0.size() != p2.size() || p0.empty()) {
    fail(ErrorKind::absolute_continuity, "PMFs must share one nonempty support");
  }
  check_pmf(p0, "p0");
  check_pmf(p1, "p1");
  check_pmf(p2, "p2");
  double sum = 0.0;
  for (std::size_t x = 0; x < p0.size(); ++x) {
    if (p0[x] == 0.0) {
      if (p1[x] != 0.0 || p2[x] != 0.0) {
        fail(ErrorKind::absolute_continuity,
             "p1/p2 not absolutely continuous w.r.t. p0 at support point " + std::to_string(x));
      }
      continue;
    }
    if (p1[x] == 0.0) {
      fail(ErrorKind::absolute_continuity, "dP1/dP0 vanishes at support point " + std::to_string(x));
    }
    const double r1 = p1[x] / p0[x];
    const double r2 = p2[x] / p0[x];
    sum += p0[x] * (r2 / r1);
  }
  return sum;
}

DominanceMargin sigma2_dominance_margin(const PsdGrid& phi_star, const PsdGrid& phi, double sigma2) {
  require_same_grid(phi_star, phi);
  if (!(sigma2 > 0.0)) fail(ErrorKind::domain, "sigma2 must be > 0");
  DominanceMargin out;
  std::vector<double> arg(phi.grid_size());
  for (std::size_t i = 0; i < arg.size(); ++i) {
    const double s = phi_star[i];
    const double floor = sigma2 + s;
    arg[i] = 1.0 + s * (phi[i] - s) / (floor * floor);
  }
  out.boundedness_min = *std::min_element(arg.begin(), arg.end());
  if (out.boundedness_min <= 0.0) {
    out.margin = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.margin = spectral_mean(arg.size(), [&](std::size_t i) { return std::log(arg[i]); });
  return out;
}

bool margin_nonnegative(double margin) noexcept { return margin >= -kMarginTolerance; }

DominanceReport dominance_report(const UncertaintySet& set, std::size_t candidate, double sigma2) {
  if (candidate >= set.size()) fail(ErrorKind::argument, "candidate index out of range");
  DominanceReport r;
  r.candidate_index = candidate;
  r.candidate_label = set[candidate].label();
  r.per_member_margins.resize(set.size());
  r.margin = std::numeric_limits<double>::infinity();
  r.boundedness_min = std::numeric_limits<double>::infinity();
  bool all_nonnegative = true;
  for (std::size_t k = 0; k < set.size(); ++k) {
    DominanceMargin m{0.0, 1.0};
    if (k != candidate) m = sigma2_dominance_margin(set[candidate], set[k], sigma2);
    r.per_member_margins[k] = m.margin;
    r.margin = std::min(r.margin, m.margin);
    r.boundedness_min = std::min(r.boundedness_min, m.boundedness_min);
    all_nonnegative = all_nonnegative && margin_nonnegative(m.margin);
    if (k != candidate && std::abs(m.margin) <= kMarginTolerance &&
        max_abs_difference(set[candidate], set[k]) > kPsdEqualityTolerance) {
      r.boundary = true;
    }
  }
  r.dominated = all_nonnegative && r.boundedness_min >= kBoundednessFloor;
  return r;
}

DominanceSearch find_dominated(const UncertaintySet& set, double sigma2) {
  DominanceSearch out;
  out.candidates.reserve(set.size());
  std::size_t best = 0;
  for (std::size_t j = 0; j < set.size(); ++j) {
    out.candidates.push_back(dominance_report(set, j, sigma2));
    const auto& rep = out.candidates.back();
    if (rep.margin > out.candidates[best].margin) best = j;
    if (!rep.dominated) continue;
    if (!out.index) {
      out.index = j;
    } else if (max_abs_difference(set[*out.index], set[j]) > kPsdEqualityTolerance) {
      fail(ErrorKind::uniqueness_violation, "members '" + set[*out.index].label() + "' and '" + set[j].label() +
                                                "' are both dominated; check tolerances");
    }
  }
  out.report = out.candidates[out.index.value_or(best)];
  return out;
}

bool flat_psd_criterion(const PsdGrid& phi, double rho, double sigma2) {
  if (!(rho > 0.0)) fail(ErrorKind::domain, "rho must be > 0");
  if (!(sigma2 > 0.0)) fail(ErrorKind::domain, "sigma2 must be > 0");
  const double offset = (1.0 + 2.0 * rho) / rho;
  const double lhs = spectral_mean(phi.grid_size(), [&](std::size_t i) { return std::log(phi[i] / sigma2 + offset); });
  const double rhs = std::log((1.0 + rho) * (1.0 + rho) / rho);
  return lhs >= rhs - kMarginTolerance;
}

bool low_snr_criterion(const PsdGrid& phi_star, const PsdGrid& phi) {
  require_same_grid(phi_star, phi);
  const double self = spectral_mean(phi.grid_size(), [&](std::size_t i) { return phi_star[i] * phi_star[i]; });
  const double cross = spectral_mean(phi.grid_size(), [&](std::size_t i) { return phi_star[i] * phi[i]; });
  return self <= cross;
}

}  // namespace robustdet
