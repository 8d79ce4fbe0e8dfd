#include "robustdet/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "robustdet/errors.hpp"
#include "robustdet/random.hpp"
#include "robustdet/stats.hpp"

namespace robustdet {

namespace {

constexpr std::size_t kBlock = 2048;

void check_models(std::span<const ToeplitzGaussian> models) {
  if (models.empty()) fail(ErrorKind::argument, "at least one model is required");
  for (const auto& m : models) {
    if (m.n() != models.front().n()) fail(ErrorKind::argument, "models must share the dimension n");
  }
}

// Fills rows [row0, row0 + y.cols()) of `out` with the LLRs of the columns of y.
void llr_block(std::span<const ToeplitzGaussian> models, double null_sigma2, const Eigen::MatrixXd& y,
               Eigen::Index row0, Eigen::MatrixXd& out) {
  const double n = static_cast<double>(y.rows());
  const Eigen::RowVectorXd energy = y.colwise().squaredNorm() / null_sigma2;
  for (std::size_t k = 0; k < models.size(); ++k) {
    Eigen::MatrixXd w = y;
    models[k].solve_lower_in_place(w);
    const double offset = 0.5 * (n * std::log(null_sigma2) - models[k].logdet());
    out.block(row0, static_cast<Eigen::Index>(k), y.cols(), 1) =
        (offset + 0.5 * (energy - w.colwise().squaredNorm()).array()).transpose();
  }
}

double log_sum_exp_row(const Eigen::MatrixXd& llr, Eigen::Index row, std::span<const double> log_w) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < log_w.size(); ++k) {
    if (std::isfinite(log_w[k])) top = std::max(top, log_w[k] + llr(row, static_cast<Eigen::Index>(k)));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < log_w.size(); ++k) {
    if (std::isfinite(log_w[k])) s += std::exp(log_w[k] + llr(row, static_cast<Eigen::Index>(k)) - top);
  }
  return top + std::log(s);
}

double lower_quantile(Eigen::VectorXd values, double p) {
  const auto idx = static_cast<Eigen::Index>(std::floor(p * static_cast<double>(values.size() - 1)));
  std::nth_element(values.data(), values.data() + idx, values.data() + values.size());
  return values[idx];
}

std::size_t count_above(const Eigen::VectorXd& g, double threshold) {
  return static_cast<std::size_t>((g.array() > threshold).count());
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::argument, "alpha must lie in (0,1)");
}

}  // namespace

MixtureWeights::MixtureWeights(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) fail(ErrorKind::argument, "mixture weights must be nonempty");
  double total = 0.0;
  for (double x : w_) {
    if (!(x >= 0.0 && x <= 1.0)) fail(ErrorKind::argument, "mixture weights must lie in [0,1]");
    total += x;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    fail(ErrorKind::argument, "mixture weights must sum to 1 (sum = " + std::to_string(total) + ")");
  }
}

MixtureWeights MixtureWeights::vertex(std::size_t size, std::size_t k) {
  std::vector<double> w(size, 0.0);
  w.at(k) = 1.0;
  return MixtureWeights(std::move(w));
}

MixtureWeights MixtureWeights::uniform(std::size_t size) {
  return MixtureWeights(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

MixtureWeights MixtureWeights::perturbed_toward(const MixtureWeights& direction, double beta) const {
  if (direction.size() != size()) fail(ErrorKind::argument, "mixture weights differ in size");
  if (!(beta >= 0.0 && beta <= 1.0)) fail(ErrorKind::argument, "beta must lie in [0,1]");
  std::vector<double> w(w_);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] += beta * (direction.w_[k] - w_[k]);
  for (double& x : w) x = std::clamp(x, 0.0, 1.0);
  return MixtureWeights(std::move(w));
}

Eigen::MatrixXd log_likelihood_ratios(std::span<const ToeplitzGaussian> models, double null_sigma2,
                                      const Eigen::MatrixXd& samples) {
  check_models(models);
  if (samples.cols() != static_cast<Eigen::Index>(models.front().n())) {
    fail(ErrorKind::argument, "sample dimension does not match the models");
  }
  Eigen::MatrixXd out(samples.rows(), static_cast<Eigen::Index>(models.size()));
  for (Eigen::Index t0 = 0; t0 < samples.rows(); t0 += kBlock) {
    const Eigen::Index count = std::min<Eigen::Index>(kBlock, samples.rows() - t0);
    const Eigen::MatrixXd y = samples.middleRows(t0, count).transpose();
    llr_block(models, null_sigma2, y, t0, out);
  }
  return out;
}

Eigen::MatrixXd simulate_log_likelihood_ratios(std::span<const ToeplitzGaussian> models, double null_sigma2,
                                               const ToeplitzGaussian& source, std::size_t trials,
                                               std::uint64_t stream) {
  check_models(models);
  if (source.n() != models.front().n()) fail(ErrorKind::argument, "source dimension does not match the models");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(trials), static_cast<Eigen::Index>(models.size()));
  for (std::size_t t0 = 0; t0 < trials; t0 += kBlock) {
    const std::size_t count = std::min(kBlock, trials - t0);
    llr_block(models, null_sigma2, source.draw_columns(stream, t0, count), static_cast<Eigen::Index>(t0), out);
  }
  return out;
}

Eigen::MatrixXd simulate_mixture_log_likelihood_ratios(std::span<const ToeplitzGaussian> models, double null_sigma2,
                                                       const MixtureWeights& r, std::size_t trials,
                                                       std::uint64_t seed) {
  check_models(models);
  if (r.size() != models.size()) fail(ErrorKind::argument, "operating point size differs from the model count");
  const std::uint64_t select = derive_seed(seed, "component");
  const std::uint64_t stream = derive_seed(seed, "mixture");
  std::vector<double> cdf(r.size());
  std::partial_sum(r.values().begin(), r.values().end(), cdf.begin());

  std::vector<std::vector<std::size_t>> assigned(models.size());
  for (std::size_t t = 0; t < trials; ++t) {
    const double u = substream_uniform(select, t) * cdf.back();
    auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    k = std::min(k, models.size() - 1);
    while (r[k] == 0.0) --k;  // u landed exactly on a zero-width bin edge
    assigned[k].push_back(t);
  }

  Eigen::MatrixXd out(static_cast<Eigen::Index>(trials), static_cast<Eigen::Index>(models.size()));
  Eigen::MatrixXd block(static_cast<Eigen::Index>(kBlock), static_cast<Eigen::Index>(models.size()));
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto& idx = assigned[k];
    for (std::size_t j0 = 0; j0 < idx.size(); j0 += kBlock) {
      const std::size_t count = std::min(kBlock, idx.size() - j0);
      const auto trials_here = std::span<const std::size_t>(idx).subspan(j0, count);
      llr_block(models, null_sigma2, models[k].draw_columns(stream, trials_here), 0, block);
      for (std::size_t j = 0; j < count; ++j) {
        out.row(static_cast<Eigen::Index>(trials_here[j])) = block.row(static_cast<Eigen::Index>(j));
      }
    }
  }
  return out;
}

Eigen::VectorXd mixture_statistics(const Eigen::MatrixXd& llr, const MixtureWeights& weights, std::size_t n) {
  if (static_cast<Eigen::Index>(weights.size()) != llr.cols()) {
    fail(ErrorKind::argument, "weights size differs from the number of models");
  }
  std::vector<double> log_w(weights.size());
  bool any = false;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    log_w[k] = weights[k] > 0.0 ? std::log(weights[k]) : -std::numeric_limits<double>::infinity();
    any = any || weights[k] > 0.0;
  }
  if (!any) fail(ErrorKind::argument, "all mixture weights are zero");
  Eigen::VectorXd g(llr.rows());
  for (Eigen::Index t = 0; t < llr.rows(); ++t) g[t] = log_sum_exp_row(llr, t, log_w) / static_cast<double>(n);
  return g;
}

double mixture_statistic(std::span<const double> y, const MixtureWeights& weights,
                         std::span<const ToeplitzGaussian> models, double null_sigma2) {
  check_models(models);
  if (y.size() != models.front().n()) fail(ErrorKind::argument, "observation length differs from n");
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = y[i];
  return mixture_statistics(log_likelihood_ratios(models, null_sigma2, row), weights, y.size())[0];
}

DetectorSpec::DetectorSpec(MixtureWeights weights_, std::vector<ToeplitzGaussian> models_, double null_sigma2_,
                           double alpha_, double threshold_)
    : weights(std::move(weights_)),
      models(std::move(models_)),
      null_sigma2(null_sigma2_),
      threshold(threshold_),
      alpha(alpha_) {
  check_models(models);
  check_alpha(alpha);
  if (weights.size() != models.size()) fail(ErrorKind::argument, "weights size differs from the number of models");
  if (!(null_sigma2 > 0.0)) fail(ErrorKind::domain, "null_sigma2 must be > 0");
  n = models.front().n();
}

std::size_t min_calibration_trials(double alpha) {
  check_alpha(alpha);
  return static_cast<std::size_t>(std::ceil(100.0 / std::min(alpha, 1.0 - alpha) - 1e-9));
}

Eigen::VectorXd h0_calibration_statistics(const DetectorSpec& spec, std::size_t trials, std::uint64_t seed) {
  const auto null_model = ToeplitzGaussian::white(spec.null_sigma2, spec.n);
  const auto llr = simulate_log_likelihood_ratios(spec.models, spec.null_sigma2, null_model, trials,
                                                  derive_seed(seed, "h0-calibration"));
  return mixture_statistics(llr, spec.weights, spec.n);
}

double calibrate_threshold(const DetectorSpec& spec, std::size_t trials, std::uint64_t seed) {
  const std::size_t need = min_calibration_trials(spec.alpha);
  if (trials < need) {
    fail(ErrorKind::argument, "calibration needs at least " + std::to_string(need) + " trials at alpha = " +
                                  std::to_string(spec.alpha) + ", got " + std::to_string(trials));
  }
  return lower_quantile(h0_calibration_statistics(spec, trials, seed), 1.0 - spec.alpha);
}

ErrorProbabilities estimate_error_probs(const DetectorSpec& spec, std::size_t true_index, std::size_t trials,
                                        std::uint64_t seed) {
  if (trials < 1000) fail(ErrorKind::argument, "error-probability estimation needs at least 1000 trials");
  if (true_index >= spec.models.size()) fail(ErrorKind::argument, "true_index out of range");
  const auto null_model = ToeplitzGaussian::white(spec.null_sigma2, spec.n);
  const auto g0 = mixture_statistics(simulate_log_likelihood_ratios(spec.models, spec.null_sigma2, null_model, trials,
                                                                    derive_seed(seed, "h0-evaluation")),
                                     spec.weights, spec.n);
  const auto g1 = mixture_statistics(simulate_log_likelihood_ratios(spec.models, spec.null_sigma2,
                                                                    spec.models[true_index], trials,
                                                                    derive_seed(seed, "h1", true_index)),
                                     spec.weights, spec.n);
  ErrorProbabilities out;
  out.trials = trials;
  out.fa_count = count_above(g0, spec.threshold);
  out.miss_count = trials - count_above(g1, spec.threshold);
  out.fa_hat = static_cast<double>(out.fa_count) / static_cast<double>(trials);
  out.miss_hat = static_cast<double>(out.miss_count) / static_cast<double>(trials);
  return out;
}

std::vector<std::vector<ExponentEstimate>> compare_detectors(const UncertaintySet& set, double sigma2,
                                                             std::span<const MixtureWeights> detectors,
                                                             std::span<const std::size_t> truths,
                                                             std::span<const std::size_t> n_values,
                                                             std::size_t trials, double alpha, std::uint64_t seed) {
  check_alpha(alpha);
  if (n_values.empty()) fail(ErrorKind::argument, "n_values must be nonempty");
  for (std::size_t i = 1; i < n_values.size(); ++i) {
    if (n_values[i] <= n_values[i - 1]) fail(ErrorKind::argument, "n_values must be strictly increasing");
  }
  if (trials < std::max<std::size_t>(1000, min_calibration_trials(alpha))) {
    fail(ErrorKind::argument, "not enough trials for alpha = " + std::to_string(alpha));
  }
  for (const auto& d : detectors) {
    if (d.size() != set.size()) fail(ErrorKind::argument, "detector weights size differs from the set size");
  }
  for (std::size_t j : truths) {
    if (j >= set.size()) fail(ErrorKind::argument, "true index out of range");
  }

  std::vector<std::vector<ExponentEstimate>> out(detectors.size(), std::vector<ExponentEstimate>(truths.size()));
  for (auto& row : out) {
    for (auto& e : row) e.trials = trials;
  }

  for (std::size_t n : n_values) {
    std::vector<ToeplitzGaussian> models;
    models.reserve(set.size());
    for (const auto& psd : set.members()) models.push_back(build_model(psd, sigma2, n));
    const auto null_model = ToeplitzGaussian::white(sigma2, n);
    const auto calib = simulate_log_likelihood_ratios(models, sigma2, null_model, trials,
                                                      derive_seed(seed, "h0-calibration"));
    const auto eval = simulate_log_likelihood_ratios(models, sigma2, null_model, trials,
                                                     derive_seed(seed, "h0-evaluation"));
    std::vector<Eigen::MatrixXd> h1;
    h1.reserve(truths.size());
    for (std::size_t j : truths) {
      h1.push_back(simulate_log_likelihood_ratios(models, sigma2, models[j], trials, derive_seed(seed, "h1", j)));
    }

    for (std::size_t d = 0; d < detectors.size(); ++d) {
      const double tau = lower_quantile(mixture_statistics(calib, detectors[d], n), 1.0 - alpha);
      const double fa =
          static_cast<double>(count_above(mixture_statistics(eval, detectors[d], n), tau)) / static_cast<double>(trials);
      for (std::size_t j = 0; j < truths.size(); ++j) {
        const auto g1 = mixture_statistics(h1[j], detectors[d], n);
        const std::size_t misses = trials - count_above(g1, tau);
        const double miss = static_cast<double>(misses) / static_cast<double>(trials);
        auto& e = out[d][j];
        e.n_values.push_back(n);
        e.thresholds.push_back(tau);
        e.fa_hat.push_back(fa);
        e.miss_hat.push_back(miss);
        e.miss_count.push_back(misses);
        e.miss_log.push_back(misses > 0 ? -std::log(miss) / static_cast<double>(n)
                                        : std::numeric_limits<double>::infinity());
        e.censored.push_back(misses < kMinMissEvents);
      }
    }
  }

  for (auto& row : out) {
    for (auto& e : row) {
      for (std::size_t i = e.n_values.size(); i-- > 0;) {
        if (e.censored[i]) continue;
        const double p = e.miss_hat[i];
        e.slope = e.miss_log[i];
        e.ci_half_width = 1.96 * std::sqrt((1.0 - p) / (p * static_cast<double>(trials))) /
                          static_cast<double>(e.n_values[i]);
        break;
      }
    }
  }
  return out;
}

ExponentEstimate empirical_exponent(const UncertaintySet& set, double sigma2, const MixtureWeights& detector_weights,
                                    std::size_t true_index, std::span<const std::size_t> n_values,
                                    std::size_t trials, double alpha, std::uint64_t seed) {
  const std::size_t truth[] = {true_index};
  auto result = compare_detectors(set, sigma2, std::span(&detector_weights, 1), truth, n_values, trials, alpha, seed);
  auto& e = result[0][0];
  if (std::all_of(e.censored.begin(), e.censored.end(), [](bool c) { return c; })) {
    fail(ErrorKind::estimation_infeasible,
         "every miss estimate has fewer than " + std::to_string(kMinMissEvents) +
             " events; use smaller n or more trials");
  }
  return std::move(e);
}

std::vector<double> tilt_grid(double lo, std::size_t points) {
  if (points == 0) fail(ErrorKind::argument, "tilt grid needs at least one point");
  if (!(lo <= 0.0)) fail(ErrorKind::argument, "tilts must be <= 0");
  if (points == 1) return {lo};
  std::vector<double> t(points);
  for (std::size_t i = 0; i < points; ++i) {
    t[i] = lo * static_cast<double>(points - 1 - i) / static_cast<double>(points - 1);
  }
  return t;
}

double chernoff_exponent(const DetectorSpec& spec, const MixtureWeights& true_model_weights,
                         std::span<const double> tilts, std::size_t trials, std::uint64_t seed) {
  if (tilts.empty()) fail(ErrorKind::argument, "tilt grid must be nonempty");
  for (double t : tilts) {
    if (!(t <= 0.0)) fail(ErrorKind::argument, "tilts must be <= 0");
  }
  if (trials == 0) fail(ErrorKind::argument, "trials must be >= 1");
  const auto llr =
      simulate_mixture_log_likelihood_ratios(spec.models, spec.null_sigma2, true_model_weights, trials, seed);
  const Eigen::VectorXd g = mixture_statistics(llr, spec.weights, spec.n);
  const double n = static_cast<double>(spec.n);
  double best = -std::numeric_limits<double>::infinity();
  for (double t : tilts) {
    const double bracket = t == 0.0 ? 0.0 : t * spec.threshold - log_mean_exp(g, t * n) / n;
    best = std::max(best, bracket);
  }
  return best;
}

}  // namespace robustdet
