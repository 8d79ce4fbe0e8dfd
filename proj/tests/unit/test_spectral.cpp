#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "robustdet/errors.hpp"
#include "robustdet/spectral.hpp"

using namespace robustdet;

namespace {

constexpr double kPi = std::numbers::pi;

// Fine-quadrature variance of the AR(1) spectrum (numpy trapezoid, M = 2^20 + 1).
constexpr double kAr1MeanOracle = 0.9999999999999997;

}  // namespace

TEST(MakePsd, FlatIsConstant) {
  const auto p = make_psd(FlatParams{1.0}, 64);
  ASSERT_EQ(p.grid_size(), 64u);
  for (double v : p.values()) EXPECT_EQ(v, 1.0);
}

TEST(MakePsd, Ar1WithZeroPoleIsWhite) {
  const auto p = make_psd(RationalAr1Params{1.0, 0.0}, 64);
  for (double v : p.values()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(MakePsd, Ar1MeanIsVariance) {
  const auto p = make_psd(RationalAr1Params{1.0, 0.5}, 1024);
  const double mean = spectral_mean(p.grid_size(), [&](std::size_t i) { return p[i]; });
  EXPECT_NEAR(mean, kAr1MeanOracle, 1e-12);
}

TEST(MakePsd, RaisedCosineShape) {
  const auto p = make_psd(RaisedCosineParams{2.0, 0.0, kPi / 2}, 9);
  EXPECT_DOUBLE_EQ(p[0], 2.0);
  EXPECT_NEAR(p[2], 1.0, 1e-15);  // w = pi/4, half way down
  for (std::size_t i = 4; i < 9; ++i) EXPECT_EQ(p[i], 0.0);
}

TEST(MakePsd, ParameterErrorsNameTheField) {
  auto expect_field = [](const PsdParams& params, const std::string& field) {
    try {
      make_psd(params, 64);
      FAIL() << "expected a parameter error for " << field;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::parameter);
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  expect_field(FlatParams{-1.0}, "level");
  expect_field(RaisedCosineParams{-1.0, 0.0, 1.0}, "peak");
  expect_field(RaisedCosineParams{1.0, 4.0, 1.0}, "center");
  expect_field(RaisedCosineParams{1.0, 0.0, 0.0}, "width");
  expect_field(RationalAr1Params{0.0, 0.5}, "variance");
  expect_field(RationalAr1Params{1.0, 1.0}, "pole");
  expect_field(TabulatedParams{{1.0, 2.0}}, "values");
}

TEST(MakePsd, SmallGridRejected) {
  try {
    make_psd(FlatParams{1.0}, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("grid_size"), std::string::npos);
  }
  EXPECT_THROW(PsdGrid(std::vector<double>(8, -1.0)), Error);
  EXPECT_THROW(PsdGrid(std::vector<double>(8, NAN)), Error);
}

TEST(EvalPsd, FlatEverywhere) { EXPECT_EQ(eval_psd(make_psd(FlatParams{2.0}, 64), 1.3), 2.0); }

TEST(EvalPsd, EvenSymmetry) {
  const auto p = make_psd(RaisedCosineParams{2.0, 1.0, 1.5}, 128);
  for (double w : {0.1, 0.77, 1.3, 2.9, kPi}) EXPECT_EQ(eval_psd(p, -w), eval_psd(p, w));
}

TEST(EvalPsd, Ar1AtZero) { EXPECT_NEAR(eval_psd(make_psd(RationalAr1Params{1.0, 0.5}, 64), 0.0), 3.0, 1e-14); }

TEST(EvalPsd, ExactAtNodesAndLinearBetween) {
  const auto p = make_psd(RationalAr1Params{1.0, 0.3}, 33);
  for (std::size_t i = 0; i < p.grid_size(); ++i) EXPECT_EQ(eval_psd(p, p.node(i)), p[i]);
  const double mid = 0.5 * (p.node(3) + p.node(4));
  EXPECT_NEAR(eval_psd(p, mid), 0.5 * (p[3] + p[4]), 1e-14);
}

TEST(EvalPsd, OutsideDomainThrows) {
  const auto p = make_psd(FlatParams{1.0}, 64);
  try {
    eval_psd(p, 3.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
}

TEST(LowerEnvelope, FlatPair) {
  const UncertaintySet set({make_psd(FlatParams{1.0}, 64), make_psd(FlatParams{2.0}, 64)});
  const auto env = lower_envelope(set);
  EXPECT_EQ(env.label(), "envelope");
  for (double v : env.values()) EXPECT_EQ(v, 1.0);
}

TEST(LowerEnvelope, SingletonIsIdentity) {
  const auto p = make_psd(RationalAr1Params{2.0, -0.4}, 64);
  const auto env = lower_envelope(UncertaintySet({p}));
  for (std::size_t i = 0; i < p.grid_size(); ++i) EXPECT_EQ(env[i], p[i]);
}

TEST(LowerEnvelope, MirrorRaisedCosinesNodewise) {
  const auto a = make_psd(RaisedCosineParams{2.0, 0.0, kPi / 2}, 257);
  const auto b = make_psd(RaisedCosineParams{2.0, kPi, kPi / 2}, 257);
  const auto env = lower_envelope(UncertaintySet({a, b}));
  for (std::size_t i = 0; i < env.grid_size(); ++i) EXPECT_EQ(env[i], std::min(a[i], b[i]));
}

TEST(UncertaintySetTest, RejectsMixedGridsAndEmpty) {
  EXPECT_THROW(UncertaintySet({make_psd(FlatParams{1.0}, 64), make_psd(FlatParams{1.0}, 65)}), Error);
  EXPECT_THROW(UncertaintySet({}), Error);
  EXPECT_THROW(UncertaintySet({make_psd(FlatParams{1.0}, 64)}, 1), Error);
}

TEST(Autocovariance, FlatIsWhite) {
  const auto c = autocovariance(make_psd(FlatParams{1.7}, kDefaultGridSize), 20);
  EXPECT_NEAR(c[0], 1.7, 1e-10);
  for (std::size_t m = 1; m < c.size(); ++m) EXPECT_NEAR(c[m], 0.0, 1e-10);
}

TEST(Autocovariance, Ar1Geometric) {
  const auto c = autocovariance(make_psd(RationalAr1Params{1.0, 0.5}, kDefaultGridSize), 30);
  for (std::size_t m = 0; m < c.size(); ++m) EXPECT_NEAR(c[m], std::pow(0.5, m), 1e-12) << "lag " << m;
}

TEST(Autocovariance, BoundedByLagZero) {
  for (const auto& p : {make_psd(RaisedCosineParams{3.0, 1.0, 0.4}, 512), make_psd(RationalAr1Params{1.0, -0.9}, 512),
                        make_psd(FlatParams{0.0}, 512)}) {
    const auto c = autocovariance(p, 5);
    EXPECT_GE(c[0], 0.0);
    EXPECT_LE(std::abs(c[5]), c[0] + 1e-15);
  }
}

TEST(Autocovariance, LagBeyondHalfPeriod) {
  // Lags past M - 1 wrap the cosine table; they must still match the AR(1) law.
  const auto c = autocovariance(make_psd(RationalAr1Params{1.0, 0.5}, 64), 100);
  EXPECT_NEAR(c[70], std::pow(0.5, 56) + std::pow(0.5, 70), 1e-15);
}
