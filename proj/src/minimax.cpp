#include "robustdet/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robustdet/errors.hpp"
#include "robustdet/random.hpp"
#include "robustdet/stats.hpp"

namespace robustdet {

namespace {

void check_weights(const MixtureWeights& w, std::size_t k) {
  if (w.size() != k) fail(ErrorKind::argument, "mixture weights size differs from the number of models");
}

void check_tilts(std::span<const double> tilts) {
  if (tilts.empty()) fail(ErrorKind::argument, "tilt grid must be nonempty");
  for (double t : tilts) {
    if (!(t <= 0.0)) fail(ErrorKind::argument, "tilts must be <= 0");
  }
}

// Statistics of one detector under H0 and under weighted H1 sample groups.
struct Scored {
  Eigen::VectorXd h0;
  std::vector<Eigen::VectorXd> h1;
  std::vector<double> weight;
};

// Per-tilt quantities of the bracket t*mean0 - (1/N) log sum_g w_g mean_g exp(tN g).
struct TiltTerm {
  double t = 0.0;
  double value = 0.0;
  double shift = 0.0;
  double expectation = 1.0;  // shifted: sum_g w_g mean_g exp(tN g - shift)
};

TiltTerm tilt_term(const Scored& s, double t, double n) {
  TiltTerm out;
  out.t = t;
  if (t == 0.0) return out;
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < s.h1.size(); ++g) {
    if (s.weight[g] > 0.0) shift = std::max(shift, t * n * s.h1[g].minCoeff());
  }
  CompensatedSum e;
  for (std::size_t g = 0; g < s.h1.size(); ++g) {
    if (s.weight[g] <= 0.0) continue;
    e.add(s.weight[g] * std::exp(log_mean_exp(s.h1[g], t * n) - shift));
  }
  out.shift = shift;
  out.expectation = e.value();
  out.value = t * compensated_mean(s.h0) - (shift + std::log(out.expectation)) / n;
  return out;
}

std::size_t best_tilt(const Scored& s, std::span<const double> tilts, double n, std::vector<double>* brackets,
                      TiltTerm* best) {
  std::size_t arg = 0;
  for (std::size_t i = 0; i < tilts.size(); ++i) {
    const TiltTerm term = tilt_term(s, tilts[i], n);
    if (brackets) brackets->push_back(term.value);
    if (i == 0 || term.value > best->value) {
      *best = term;
      arg = i;
    }
  }
  return arg;
}

Eigen::ArrayXd h1_influence(const Scored& s, std::size_t g, const TiltTerm& term, double n) {
  if (term.t == 0.0) return Eigen::ArrayXd::Zero(s.h1[g].size());
  return (term.t * n * s.h1[g].array() - term.shift).exp() * (s.weight[g] / term.expectation / n);
}

// Delta-method standard error of bracket_a(ta) - bracket_b(tb) on shared
// samples; `b` may be null for a single bracket.
double bracket_se(const Scored& a, const TiltTerm& ta, const Scored* b, const TiltTerm* tb, double n) {
  Eigen::VectorXd d0 = ta.t * a.h0;
  if (b) d0 -= tb->t * b->h0;
  double var = sample_variance(d0) / static_cast<double>(d0.size());
  for (std::size_t g = 0; g < a.h1.size(); ++g) {
    if (a.weight[g] <= 0.0) continue;
    Eigen::VectorXd d = -h1_influence(a, g, ta, n).matrix();
    if (b) d += h1_influence(*b, g, *tb, n).matrix();
    var += sample_variance(d) / static_cast<double>(d.size());
  }
  return std::sqrt(var);
}

Scored score(const MixtureWeights& q, const MixtureKlObjective& objective, const std::vector<Eigen::MatrixXd>& h1_llr,
             std::span<const double> weight) {
  Scored s;
  s.h0 = mixture_statistics(objective.llr(), q, objective.n());
  for (std::size_t g = 0; g < h1_llr.size(); ++g) {
    s.weight.push_back(weight[g]);
    s.h1.push_back(weight[g] > 0.0 ? mixture_statistics(h1_llr[g], q, objective.n()) : Eigen::VectorXd());
  }
  return s;
}

}  // namespace

Eigen::MatrixXd draw_h0_samples(double null_sigma2, std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) fail(ErrorKind::argument, "trials must be >= 1");
  return sample_gaussian(ToeplitzGaussian::white(null_sigma2, n), trials, derive_seed(seed, "h0-frozen"));
}

MixtureKlObjective::MixtureKlObjective(std::vector<ToeplitzGaussian> models, double null_sigma2,
                                       const Eigen::MatrixXd& h0_samples)
    : models_(std::move(models)), null_sigma2_(null_sigma2) {
  if (h0_samples.rows() == 0) fail(ErrorKind::argument, "the frozen H0 sample is empty");
  llr_ = log_likelihood_ratios(models_, null_sigma2_, h0_samples);
}

double MixtureKlObjective::value(const MixtureWeights& r) const {
  check_weights(r, size());
  const double v = -compensated_mean(mixture_statistics(llr_, r, n()));
  if (!std::isfinite(v)) fail(ErrorKind::numerical, "sample-average KL is not finite");
  return v;
}

double MixtureKlObjective::standard_error(const MixtureWeights& r) const {
  check_weights(r, size());
  return std::sqrt(sample_variance(mixture_statistics(llr_, r, n())) / static_cast<double>(trials()));
}

Eigen::VectorXd MixtureKlObjective::gradient(const MixtureWeights& r) const {
  check_weights(r, size());
  const double nn = static_cast<double>(n());
  // log sum_j r_j p_j / p_0, per sample
  const Eigen::VectorXd lse = mixture_statistics(llr_, r, n()) * nn;
  Eigen::VectorXd grad(static_cast<Eigen::Index>(size()));
  for (Eigen::Index k = 0; k < grad.size(); ++k) {
    const Eigen::VectorXd ratio = (llr_.col(k) - lse).array().exp().matrix();
    grad[k] = -compensated_mean(ratio) / nn;
  }
  return grad;
}

double sample_average_kl(const MixtureWeights& r, std::span<const ToeplitzGaussian> models, double null_sigma2,
                         const Eigen::MatrixXd& h0_samples) {
  return MixtureKlObjective(std::vector<ToeplitzGaussian>(models.begin(), models.end()), null_sigma2, h0_samples)
      .value(r);
}

MixtureOptimum minimize_mixture_weights(const MixtureKlObjective& objective, const MixtureWeights& init,
                                        std::size_t max_iters, double tol) {
  check_weights(init, objective.size());
  const std::size_t k = objective.size();
  const double floor = 1.0 / (10.0 * static_cast<double>(k));
  for (double w : init.values()) {
    if (w < floor) fail(ErrorKind::argument, "init must be interior: every weight >= 1/(10K)");
  }

  MixtureWeights r = init;
  double f = objective.value(r);
  MixtureOptimum out{r, f, 0.0, 0, false, {}};
  if (k == 1) {
    out.converged = true;
    out.trace.push_back({0, {1.0}, f, 0.0, 0.0});
    return out;
  }

  for (std::size_t it = 0;; ++it) {
    const Eigen::VectorXd grad = objective.gradient(r);
    Eigen::Index vertex = 0;
    grad.minCoeff(&vertex);
    double inner = 0.0;
    for (std::size_t j = 0; j < k; ++j) inner += grad[static_cast<Eigen::Index>(j)] * r[j];
    const double gap = std::max(0.0, inner - grad[vertex]);
    out.gap = gap;
    out.iterations = it;
    if (gap <= tol) {
      out.converged = true;
      out.trace.push_back({it, {r.values().begin(), r.values().end()}, f, gap, 0.0});
      break;
    }
    if (it >= max_iters) {
      out.trace.push_back({it, {r.values().begin(), r.values().end()}, f, gap, 0.0});
      break;
    }

    const auto target = MixtureWeights::vertex(k, static_cast<std::size_t>(vertex));
    double step = 2.0 / (static_cast<double>(it) + 2.0);
    bool moved = false;
    for (int halving = 0; halving <= 60; ++halving, step *= 0.5) {
      MixtureWeights next = r.perturbed_toward(target, step);
      const double fn = objective.value(next);
      if (fn <= f) {
        out.trace.push_back({it, {r.values().begin(), r.values().end()}, f, gap, step});
        r = std::move(next);
        f = fn;
        moved = true;
        break;
      }
    }
    if (!moved) {
      out.trace.push_back({it, {r.values().begin(), r.values().end()}, f, gap, 0.0});
      break;
    }
  }
  out.r_star = r;
  out.value = f;
  return out;
}

KktCertificate kkt_certificate(std::size_t candidate_index, std::span<const ToeplitzGaussian> models,
                               double null_sigma2) {
  if (models.empty()) fail(ErrorKind::argument, "at least one model is required");
  if (candidate_index >= models.size()) fail(ErrorKind::argument, "candidate_index out of range");
  const std::size_t n = models.front().n();
  for (const auto& m : models) {
    if (m.n() != n || m.sigma2() != models.front().sigma2()) {
      fail(ErrorKind::argument, "models must share n and sigma2");
    }
  }
  const double nn = static_cast<double>(n);
  KktCertificate c;
  c.candidate_index = candidate_index;
  c.lambda = 1.0 / nn;
  c.mu.assign(models.size(), 0.0);
  c.ratio.assign(models.size(), 1.0);
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (k == candidate_index) continue;
    const auto re = ratio_expectation(null_sigma2, models[candidate_index], models[k]);
    if (re.diverged) {
      c.ratio[k] = std::numeric_limits<double>::infinity();
      c.mu[k] = -std::numeric_limits<double>::infinity();
      c.max_violation = std::numeric_limits<double>::infinity();
      if (!c.diverged_index) c.diverged_index = k;
      continue;
    }
    c.ratio[k] = re.value;
    c.mu[k] = (1.0 - re.value) / nn;
    c.max_violation = std::max(c.max_violation, re.value - 1.0);
  }
  c.singleton_verified = !c.diverged_index && c.max_violation <= kKktTolerance;
  return c;
}

UtilityEstimate utility(const MixtureWeights& q, const MixtureWeights& r, const MixtureKlObjective& objective,
                        std::uint64_t h1_seed, std::span<const double> tilts, std::size_t h1_trials) {
  check_weights(q, objective.size());
  check_weights(r, objective.size());
  check_tilts(tilts);
  if (h1_trials < 2) fail(ErrorKind::argument, "h1_trials must be >= 2");
  const std::vector<Eigen::MatrixXd> h1{simulate_mixture_log_likelihood_ratios(
      objective.models(), objective.null_sigma2(), r, h1_trials, h1_seed)};
  const double one[] = {1.0};
  const Scored s = score(q, objective, h1, one);
  const double n = static_cast<double>(objective.n());

  UtilityEstimate out;
  TiltTerm best;
  const std::size_t arg = best_tilt(s, tilts, n, &out.brackets, &best);
  out.value = best.value;
  out.tilt = tilts[arg];
  out.standard_error = bracket_se(s, best, nullptr, nullptr, n);
  return out;
}

RegularityProbe regularity_probe(const MixtureWeights& r_star, const MixtureWeights& r_dir,
                                 std::span<const double> beta_ladder, const MixtureKlObjective& objective,
                                 std::uint64_t h1_seed, std::span<const double> tilts, std::size_t h1_trials) {
  const std::size_t k = objective.size();
  check_weights(r_star, k);
  check_weights(r_dir, k);
  check_tilts(tilts);
  if (h1_trials < 2) fail(ErrorKind::argument, "h1_trials must be >= 2");
  for (std::size_t i = 0; i < beta_ladder.size(); ++i) {
    const double b = beta_ladder[i];
    if (!(b >= 0.0 && b <= 1.0)) fail(ErrorKind::argument, "beta values must lie in [0,1]");
    if (i > 0 && b > beta_ladder[i - 1]) fail(ErrorKind::argument, "beta ladder must be decreasing");
  }

  const double n = static_cast<double>(objective.n());
  std::vector<Eigen::MatrixXd> strata;
  strata.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    strata.push_back(simulate_log_likelihood_ratios(objective.models(), objective.null_sigma2(),
                                                    objective.models()[j], h1_trials,
                                                    derive_seed(h1_seed, "stratum", j)));
  }

  RegularityProbe out;
  {
    // E_{r_dir}[p0 / p_{r*}] = sum_j r_dir[j] mean_j exp(-N g(r*))
    CompensatedSum e;
    double var = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (r_dir[j] <= 0.0) continue;
      const Eigen::VectorXd x = (-n * mixture_statistics(strata[j], r_star, objective.n())).array().exp().matrix();
      e.add(r_dir[j] * compensated_mean(x));
      var += r_dir[j] * r_dir[j] * sample_variance(x) / static_cast<double>(h1_trials);
    }
    out.linear_coefficient = (1.0 - e.value()) / n;
    out.linear_coefficient_se = std::sqrt(var) / n;
  }

  for (double beta : beta_ladder) {
    const MixtureWeights r_beta = r_star.perturbed_toward(r_dir, beta);
    const Scored best_response = score(r_beta, objective, strata, r_beta.values());
    const Scored fixed = score(r_star, objective, strata, r_beta.values());
    TiltTerm ta, tb;
    best_tilt(best_response, tilts, n, nullptr, &ta);
    best_tilt(fixed, tilts, n, nullptr, &tb);
    RegularityPoint p;
    p.beta = beta;
    p.gap = ta.value - tb.value;
    p.standard_error = bracket_se(best_response, ta, &fixed, &tb, n);
    out.points.push_back(p);
  }
  return out;
}

}  // namespace robustdet
