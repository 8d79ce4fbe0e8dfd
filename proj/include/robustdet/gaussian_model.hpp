#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "robustdet/spectral.hpp"

namespace robustdet {

// Diagonal jitter ladder tried in order before a covariance is declared
// not positive definite.
inline constexpr double kJitterLadder[] = {0.0, 1e-12, 1e-10, 1e-8};

// Off-diagonal autocovariances at or below this fraction of the diagonal are
// quadrature roundoff (flat PSDs); such models factor as a multiple of I.
inline constexpr double kDiagonalRoundoff = 1e-14;

// Zero-mean N-dimensional Gaussian with covariance s2*I + Sigma_N, where
// Sigma_N is the symmetric Toeplitz matrix with first row `autocov`.
// Immutable; copies share the cached Cholesky factor.
class ToeplitzGaussian {
 public:
  ToeplitzGaussian(std::vector<double> autocov, double sigma2, std::string label = {});

  // The H0 model N(0, s2*I).
  static ToeplitzGaussian white(double sigma2, std::size_t n);

  std::size_t n() const noexcept;
  double sigma2() const noexcept;
  std::span<const double> autocov() const noexcept;
  const std::string& label() const noexcept;
  double logdet() const noexcept;
  double jitter() const noexcept;
  bool is_white() const noexcept;

  // Lower-triangular L with L*L^T = s2*I + Sigma_N (+ jitter*I).
  const Eigen::MatrixXd& lower() const noexcept;

  Eigen::MatrixXd signal_covariance() const;
  Eigen::MatrixXd covariance() const;
  Eigen::MatrixXd inverse() const;

  // x <- L^{-1} x, column by column.
  void solve_lower_in_place(Eigen::MatrixXd& x) const;

  // Columns are i.i.d. draws for trials [first, first + count) of `stream`.
  Eigen::MatrixXd draw_columns(std::uint64_t stream, std::size_t first, std::size_t count) const;
  // Columns are draws for the listed trial indices of `stream`.
  Eigen::MatrixXd draw_columns(std::uint64_t stream, std::span<const std::size_t> trials) const;

  bool shares_state_with(const ToeplitzGaussian& other) const noexcept { return state_ == other.state_; }

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

ToeplitzGaussian build_model(const PsdGrid& psd, double sigma2, std::size_t n);

// D(p || q) in nats.
double gaussian_kl(const ToeplitzGaussian& p, const ToeplitzGaussian& q);

// Minimum eigenvalue the middle matrix I + s2*(C2^-1 - C1^-1) must exceed
// for the ratio integral to be treated as convergent.
inline constexpr double kMiddleEigenFloor = 1e-10;

struct RatioExpectation {
  double value = 1.0;      // +infinity when diverged
  double log_value = 0.0;  // +infinity when diverged
  bool diverged = false;
};

// E_{N(0, s2 I)}[p2/p1] in closed form:
// sqrt(|C1| / (|C2| * |I + s2 (C2^-1 - C1^-1)|)).
RatioExpectation ratio_expectation(double p0_sigma2, const ToeplitzGaussian& p1, const ToeplitzGaussian& p2);

// N(0, C1) dominated by N(0, C2) w.r.t. N(0, s2 I): middle matrix PD and
// ratio_expectation <= 1 + 1e-10.
bool finite_n_dominates(double p0_sigma2, const ToeplitzGaussian& p1, const ToeplitzGaussian& p2);

// trials x n matrix; row t is drawn from substream t of `seed`.
Eigen::MatrixXd sample_gaussian(const ToeplitzGaussian& model, std::size_t trials, std::uint64_t seed);

}  // namespace robustdet
