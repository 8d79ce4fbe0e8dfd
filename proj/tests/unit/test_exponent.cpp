#include <gtest/gtest.h>

#include <cmath>

#include "robustdet/dominance.hpp"
#include "robustdet/exponent.hpp"

using namespace robustdet;

namespace {

// Fine quadrature (numpy trapezoid, M = 2^20 + 1) and dense-matrix KL rates.
constexpr double kAr1Exponent = 0.09539900723632602;
constexpr double kAr1KlRate64 = 0.09545773593884999;
constexpr double kAr1KlRate256 = 0.09541368941195583;
constexpr double kAr1KlRate1024 = 0.09540267778023404;

double flat_closed_form(double rho) { return 0.5 * (std::log1p(rho) - rho / (1.0 + rho)); }

}  // namespace

TEST(ErrorExponent, ZeroPsd) { EXPECT_EQ(error_exponent(make_psd(FlatParams{0.0}), 1.0).value, 0.0); }

TEST(ErrorExponent, FlatClosedForms) {
  EXPECT_NEAR(error_exponent(make_psd(FlatParams{1.0}), 1.0).value, 0.5 * (std::log(2.0) - 0.5), 1e-14);
  EXPECT_NEAR(error_exponent(make_psd(FlatParams{3.0}), 1.0).value, 0.5 * (std::log(4.0) - 0.75), 1e-14);
  EXPECT_NEAR(error_exponent(make_psd(FlatParams{1.0}), 1.0).value, 0.096574, 5e-7);
  EXPECT_NEAR(error_exponent(make_psd(FlatParams{3.0}), 1.0).value, 0.318147, 5e-7);
}

TEST(ErrorExponent, CarriesLabelAndNoise) {
  const auto v = error_exponent(make_psd(FlatParams{2.0}, 64, "two"), 2.0);
  EXPECT_EQ(v.psd_label, "two");
  EXPECT_EQ(v.sigma2, 2.0);
  EXPECT_NEAR(v.value, flat_closed_form(1.0), 1e-14);
}

TEST(ErrorExponent, Ar1MatchesFineQuadrature) {
  EXPECT_NEAR(error_exponent(make_psd(RationalAr1Params{1.0, 0.5}), 1.0).value, kAr1Exponent, 1e-12);
}

TEST(ErrorExponent, RefinementConverges) {
  // Refinement integrates the exponent integrand of the piecewise-linear
  // interpolant of phi; successive refinements must settle.
  const auto coarse = make_psd(RaisedCosineParams{3.0, 1.0, 1.0}, 64);
  auto at = [&](std::size_t r) { return error_exponent(coarse, 1.0, r).value; };
  EXPECT_LT(std::abs(at(16) - at(32)), 0.1 * std::abs(at(1) - at(2)));
  EXPECT_NEAR(error_exponent(make_psd(FlatParams{1.0}, 64), 1.0, 5).value, flat_closed_form(1.0), 1e-14);
  EXPECT_THROW(error_exponent(coarse, 1.0, 0), std::exception);
}

TEST(GenieBound, FlatPair) {
  const UncertaintySet set({make_psd(FlatParams{1.0}), make_psd(FlatParams{3.0})});
  const auto g = genie_bound(set, 1.0);
  EXPECT_NEAR(g.value, 0.096574, 5e-7);
  EXPECT_EQ(g.argmin_index, 0u);
}

TEST(GenieBound, Singleton) {
  const auto p = make_psd(RationalAr1Params{2.0, 0.3});
  EXPECT_EQ(genie_bound(UncertaintySet({p}), 1.0).value, error_exponent(p, 1.0).value);
}

TEST(GenieBound, TiesPickFirst) {
  const auto p = make_psd(FlatParams{2.0});
  EXPECT_EQ(genie_bound(UncertaintySet({make_psd(FlatParams{3.0}), p, p.relabeled("b")}), 1.0).argmin_index, 1u);
}

TEST(GenieBound, ArgminIsDominatedMember) {
  const UncertaintySet set({make_psd(FlatParams{3.0}), make_psd(RationalAr1Params{1.0, 0.5}),
                            make_psd(FlatParams{0.5}), make_psd(RaisedCosineParams{4.0, 2.0, 1.0})});
  const auto dom = find_dominated(set, 1.0);
  ASSERT_TRUE(dom.index.has_value());
  EXPECT_EQ(genie_bound(set, 1.0).argmin_index, *dom.index);
}

TEST(KlRate, FlatExactAtEveryN) {
  for (std::size_t n : {1u, 7u, 64u}) {
    EXPECT_NEAR(kl_rate(make_psd(FlatParams{1.0}), 1.0, n), flat_closed_form(1.0), 1e-12);
  }
}

TEST(KlRate, ZeroPsd) {
  for (std::size_t n : {1u, 10u}) EXPECT_EQ(kl_rate(make_psd(FlatParams{0.0}), 1.0, n), 0.0);
}

TEST(KlRate, Ar1MatchesDenseOracle) {
  const auto p = make_psd(RationalAr1Params{1.0, 0.5});
  EXPECT_NEAR(kl_rate(p, 1.0, 64), kAr1KlRate64, 1e-11);
  EXPECT_NEAR(kl_rate(p, 1.0, 256), kAr1KlRate256, 1e-11);
  const double r1024 = kl_rate(p, 1.0, 1024);
  EXPECT_NEAR(r1024, kAr1KlRate1024, 1e-11);
  EXPECT_LE(std::abs(r1024 - kAr1Exponent), 0.02 * kAr1Exponent);
}
