#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "robustdet/gaussian_model.hpp"
#include "robustdet/spectral.hpp"

namespace robustdet {

inline constexpr double kWeightSumTolerance = 1e-12;
// Miss estimates backed by fewer events are censored.
inline constexpr std::size_t kMinMissEvents = 10;

// A point on the K-simplex: detector weights q or operating point r.
class MixtureWeights {
 public:
  explicit MixtureWeights(std::vector<double> w);

  static MixtureWeights vertex(std::size_t size, std::size_t k);
  static MixtureWeights uniform(std::size_t size);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t k) const { return w_[k]; }
  std::span<const double> values() const noexcept { return w_; }

  // this + beta * (direction - this); exactly `this` when beta == 0 or
  // direction == this.
  MixtureWeights perturbed_toward(const MixtureWeights& direction, double beta) const;

  friend bool operator==(const MixtureWeights&, const MixtureWeights&) = default;

 private:
  std::vector<double> w_;
};

// Row t, column k: log p_{N,k}(y_t) - log p_{N,0}(y_t) for the rows of
// `samples` (trials x n), with p_{N,0} = N(0, null_sigma2 I).
Eigen::MatrixXd log_likelihood_ratios(std::span<const ToeplitzGaussian> models, double null_sigma2,
                                      const Eigen::MatrixXd& samples);

// Same table for `trials` fresh draws of `source` from substreams of `stream`.
Eigen::MatrixXd simulate_log_likelihood_ratios(std::span<const ToeplitzGaussian> models, double null_sigma2,
                                               const ToeplitzGaussian& source, std::size_t trials,
                                               std::uint64_t stream);

// Draws from the mixture sum_k r_k p_{N,k}: trial t picks its component from
// a uniform on substream t of derive_seed(seed, "component"), then draws the
// component sample from substream t of derive_seed(seed, "mixture").
Eigen::MatrixXd simulate_mixture_log_likelihood_ratios(std::span<const ToeplitzGaussian> models, double null_sigma2,
                                                       const MixtureWeights& r, std::size_t trials,
                                                       std::uint64_t seed);

// g_N = (1/N) log sum_k q_k exp(l_k) for each row of an LLR table.
Eigen::VectorXd mixture_statistics(const Eigen::MatrixXd& llr, const MixtureWeights& weights, std::size_t n);

double mixture_statistic(std::span<const double> y, const MixtureWeights& weights,
                         std::span<const ToeplitzGaussian> models, double null_sigma2);

struct DetectorSpec {
  MixtureWeights weights;
  std::vector<ToeplitzGaussian> models;  // H1 candidates, shared n and sigma2
  double null_sigma2 = 1.0;
  double threshold = 0.0;
  std::size_t n = 0;
  double alpha = 0.1;

  DetectorSpec(MixtureWeights weights, std::vector<ToeplitzGaussian> models, double null_sigma2, double alpha,
               double threshold = 0.0);
};

std::size_t min_calibration_trials(double alpha);

// g_N on the H0 calibration stream of `seed`.
Eigen::VectorXd h0_calibration_statistics(const DetectorSpec& spec, std::size_t trials, std::uint64_t seed);

// Empirical (1 - alpha)-quantile of g_N under H0, lower order statistic.
// The test decides H0 iff g_N <= threshold.
double calibrate_threshold(const DetectorSpec& spec, std::size_t trials, std::uint64_t seed);

struct ErrorProbabilities {
  double fa_hat = 0.0;
  double miss_hat = 0.0;
  std::size_t fa_count = 0;
  std::size_t miss_count = 0;
  std::size_t trials = 0;
};

// False alarms on the H0 evaluation stream, misses on the H1 stream of
// models[true_index]. Both streams depend on the seed only, so detectors
// evaluated with one seed score identical samples.
ErrorProbabilities estimate_error_probs(const DetectorSpec& spec, std::size_t true_index, std::size_t trials,
                                        std::uint64_t seed);

struct ExponentEstimate {
  std::vector<std::size_t> n_values;
  std::vector<double> thresholds;
  std::vector<double> fa_hat;
  std::vector<double> miss_hat;
  std::vector<std::size_t> miss_count;
  std::vector<double> miss_log;  // -(1/n) log miss_hat
  std::vector<bool> censored;
  double slope = 0.0;           // miss_log at the largest uncensored n
  double ci_half_width = 0.0;   // 95% half-width of that entry
  std::size_t trials = 0;
};

// Calibrates LRT/mixture detector `detector_weights` at every n and estimates
// its miss exponent when the truth is set[true_index].
ExponentEstimate empirical_exponent(const UncertaintySet& set, double sigma2, const MixtureWeights& detector_weights,
                                    std::size_t true_index, std::span<const std::size_t> n_values,
                                    std::size_t trials, double alpha, std::uint64_t seed);

// Many detectors against many truths on shared samples: result[d][j] is the
// estimate for detectors[d] when the truth is set[truths[j]]. Entries that
// are censored at every n keep all-censored flags instead of throwing.
std::vector<std::vector<ExponentEstimate>> compare_detectors(const UncertaintySet& set, double sigma2,
                                                             std::span<const MixtureWeights> detectors,
                                                             std::span<const std::size_t> truths,
                                                             std::span<const std::size_t> n_values,
                                                             std::size_t trials, double alpha, std::uint64_t seed);

// Uniform grid of `points` normalized tilts t = s/N on [lo, 0].
std::vector<double> tilt_grid(double lo = -2.0, std::size_t points = 41);

// sup over t of [t * threshold - (1/N) log E_{p_N(.;r)} exp(t N g_N)], the
// expectation estimated on `trials` draws from the r-mixture.
double chernoff_exponent(const DetectorSpec& spec, const MixtureWeights& true_model_weights,
                         std::span<const double> tilts, std::size_t trials, std::uint64_t seed);

}  // namespace robustdet
