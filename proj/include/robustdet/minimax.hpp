#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "robustdet/detection.hpp"
#include "robustdet/gaussian_model.hpp"

namespace robustdet {

inline constexpr double kKktTolerance = 1e-10;
inline constexpr double kMonotoneSlack = 1e-12;

// trials x n draws from N(0, null_sigma2 I), frozen for an optimization run.
Eigen::MatrixXd draw_h0_samples(double null_sigma2, std::size_t n, std::size_t trials, std::uint64_t seed);

// Sample-average mixture KL f(r) = mean_t[-g_N(y_t; r)] over a frozen H0
// sample. The LLR table is computed once at construction.
class MixtureKlObjective {
 public:
  MixtureKlObjective(std::vector<ToeplitzGaussian> models, double null_sigma2, const Eigen::MatrixXd& h0_samples);

  std::size_t size() const noexcept { return models_.size(); }
  std::size_t n() const noexcept { return models_.front().n(); }
  std::size_t trials() const noexcept { return static_cast<std::size_t>(llr_.rows()); }
  const std::vector<ToeplitzGaussian>& models() const noexcept { return models_; }
  double null_sigma2() const noexcept { return null_sigma2_; }
  const Eigen::MatrixXd& llr() const noexcept { return llr_; }

  double value(const MixtureWeights& r) const;
  // Standard error of value(r) as a sample mean.
  double standard_error(const MixtureWeights& r) const;
  // d f / d r_k = -(1/N) mean_t[p_k(y_t) / sum_j r_j p_j(y_t)].
  Eigen::VectorXd gradient(const MixtureWeights& r) const;

 private:
  std::vector<ToeplitzGaussian> models_;
  double null_sigma2_;
  Eigen::MatrixXd llr_;
};

double sample_average_kl(const MixtureWeights& r, std::span<const ToeplitzGaussian> models, double null_sigma2,
                         const Eigen::MatrixXd& h0_samples);

struct FrankWolfeStep {
  std::size_t iteration = 0;
  std::vector<double> weights;
  double value = 0.0;
  double gap = 0.0;   // <grad, r> - min_k grad_k
  double step = 0.0;  // accepted step length, 0 for the final record
};

struct MixtureOptimum {
  MixtureWeights r_star;
  double value = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<FrankWolfeStep> trace;
};

// Frank-Wolfe with step 2/(it+2). A step that would raise the objective is
// halved until it does not; if none of 60 halvings helps, the run stops.
MixtureOptimum minimize_mixture_weights(const MixtureKlObjective& objective, const MixtureWeights& init,
                                        std::size_t max_iters = 500, double tol = 1e-9);

struct KktCertificate {
  std::size_t candidate_index = 0;
  double lambda = 0.0;
  std::vector<double> mu;
  std::vector<double> ratio;  // E_{p0}[p_k / p_candidate], 1 at the candidate
  double max_violation = 0.0;
  bool singleton_verified = false;
  std::optional<std::size_t> diverged_index;
};

// Closed-form check of the optimality system at the vertex e_candidate.
KktCertificate kkt_certificate(std::size_t candidate_index, std::span<const ToeplitzGaussian> models,
                               double null_sigma2);

struct UtilityEstimate {
  double value = 0.0;
  double tilt = 0.0;  // maximizing normalized tilt
  double standard_error = 0.0;
  std::vector<double> brackets;  // one per tilt
};

// U_N(q, r) with E_{p0}[g_N] taken on the objective's frozen H0 sample and
// the r-mixture expectation on `h1_trials` mixture draws from `h1_seed`.
UtilityEstimate utility(const MixtureWeights& q, const MixtureWeights& r, const MixtureKlObjective& objective,
                        std::uint64_t h1_seed, std::span<const double> tilts, std::size_t h1_trials);

struct RegularityPoint {
  double beta = 0.0;
  double gap = 0.0;
  double standard_error = 0.0;
};

struct RegularityProbe {
  std::vector<RegularityPoint> points;
  // (1/N)(1 - E_{r_dir}[p0 / p_{r*}]), the first-order slope of the best
  // response utility along r_dir.
  double linear_coefficient = 0.0;
  double linear_coefficient_se = 0.0;
};

// gap(beta) = U(r_beta, r_beta) - U(r_star, r_beta), r_beta = r_star moved a
// fraction beta toward r_dir. The r_beta expectation is stratified: stratum k
// holds h1_trials draws of model k, weighted by r_beta[k], shared across all
// beta.
RegularityProbe regularity_probe(const MixtureWeights& r_star, const MixtureWeights& r_dir,
                                 std::span<const double> beta_ladder, const MixtureKlObjective& objective,
                                 std::uint64_t h1_seed, std::span<const double> tilts, std::size_t h1_trials);

}  // namespace robustdet
