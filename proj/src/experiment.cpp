#include "robustdet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <variant>

#include "robustdet/detection.hpp"
#include "robustdet/dominance.hpp"
#include "robustdet/errors.hpp"
#include "robustdet/exponent.hpp"
#include "robustdet/gaussian_model.hpp"
#include "robustdet/minimax.hpp"
#include "robustdet/random.hpp"

namespace robustdet {

namespace {

using nlohmann::json;

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.in_stage(name);
  }
}

// JSON has no infinities; unbounded values are written as null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json psd_to_json(const PsdSpec& p) {
  json j{{"label", p.label}, {"family", std::string(to_string(family_of(p.params)))}};
  std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, FlatParams>) {
          j["level"] = params.level;
        } else if constexpr (std::is_same_v<T, RaisedCosineParams>) {
          j["peak"] = params.peak;
          j["center"] = params.center;
          j["width"] = params.width;
        } else if constexpr (std::is_same_v<T, RationalAr1Params>) {
          j["variance"] = params.variance;
          j["pole"] = params.pole;
        } else {
          j["values"] = params.values;
        }
      },
      p.params);
  return j;
}

json dominance_to_json(const DominanceReport& r, const UncertaintySet& set) {
  json margins = json::object();
  for (std::size_t k = 0; k < set.size(); ++k) margins[set[k].label()] = finite_or_null(r.per_member_margins[k]);
  return {{"candidate", r.candidate_label},
          {"margin", finite_or_null(r.margin)},
          {"boundedness_min", r.boundedness_min},
          {"dominated", r.dominated},
          {"boundary", r.boundary},
          {"per_member_margins", margins}};
}

json kkt_to_json(const KktCertificate& c, const UncertaintySet& set) {
  json ratio = json::object();
  json mu = json::object();
  for (std::size_t k = 0; k < set.size(); ++k) {
    ratio[set[k].label()] = finite_or_null(c.ratio[k]);
    mu[set[k].label()] = finite_or_null(c.mu[k]);
  }
  return {{"candidate", set[c.candidate_index].label()},
          {"lambda", c.lambda},
          {"mu", mu},
          {"ratio_expectation", ratio},
          {"max_violation", finite_or_null(c.max_violation)},
          {"singleton_verified", c.singleton_verified},
          {"diverged", c.diverged_index ? json(set[*c.diverged_index].label()) : json(nullptr)}};
}

json optimum_to_json(const MixtureOptimum& o) {
  json trace = json::array();
  for (const auto& s : o.trace) {
    trace.push_back({{"iteration", s.iteration}, {"weights", s.weights}, {"value", s.value}, {"gap", s.gap},
                     {"step", s.step}});
  }
  return {{"r_star", std::vector<double>(o.r_star.values().begin(), o.r_star.values().end())},
          {"value", o.value},
          {"gap", o.gap},
          {"iterations", o.iterations},
          {"converged", o.converged},
          {"trace", trace}};
}

void append_series(json& series, const ExponentEstimate& e, const std::string& member) {
  for (std::size_t i = 0; i < e.n_values.size(); ++i) {
    series.push_back({{"n", e.n_values[i]},
                      {"member", member},
                      {"threshold", e.thresholds[i]},
                      {"fa_hat", e.fa_hat[i]},
                      {"miss_hat", e.miss_hat[i]},
                      {"miss_count", e.miss_count[i]},
                      {"miss_log", finite_or_null(e.miss_log[i])},
                      {"censored", static_cast<bool>(e.censored[i])}});
  }
}

json estimate_summary(const ExponentEstimate& e, const std::string& member) {
  const bool all_censored = std::all_of(e.censored.begin(), e.censored.end(), [](bool c) { return c; });
  return {{"member", member},
          {"slope", all_censored ? json(nullptr) : json(e.slope)},
          {"ci_half_width", all_censored ? json(nullptr) : json(e.ci_half_width)}};
}

std::vector<ToeplitzGaussian> build_models(const UncertaintySet& set, double sigma2, std::size_t n) {
  std::vector<ToeplitzGaussian> models;
  for (const auto& psd : set.members()) models.push_back(build_model(psd, sigma2, n));
  return models;
}

// The configured candidate, else the dominated member.
std::size_t resolve_candidate(const ExperimentConfig& c, const UncertaintySet& set) {
  if (c.candidate_label) return *set.find_label(*c.candidate_label);
  const auto search = stage("dominance", [&] { return find_dominated(set, c.sigma2); });
  if (!search.index) {
    fail(ErrorKind::config, "no member of the set is sigma2-dominated; set `candidate` to choose a detector");
  }
  return *search.index;
}

std::vector<std::size_t> all_indices(std::size_t k) {
  std::vector<std::size_t> v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = i;
  return v;
}

json run_exponent(const ExperimentConfig& c, const UncertaintySet& set) {
  json exps = json::array();
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto v = stage("exponent", [&] { return error_exponent(set[k], c.sigma2); });
    exps.push_back({{"label", set[k].label()}, {"value", v.value}});
  }
  const auto genie = stage("genie_bound", [&] { return genie_bound(set, c.sigma2); });
  json rates = json::array();
  for (std::size_t n : c.n_values) {
    for (std::size_t k = 0; k < set.size(); ++k) {
      const double r = stage("kl_rate", [&] { return kl_rate(set[k], c.sigma2, n); });
      rates.push_back({{"n", n}, {"member", set[k].label()}, {"value", r}});
    }
  }
  return {{"exponents", exps},
          {"genie", {{"value", genie.value}, {"argmin", set[genie.argmin_index].label()}}},
          {"kl_rate", rates}};
}

json run_dominance(const ExperimentConfig& c, const UncertaintySet& set) {
  const auto search = stage("dominance", [&] { return find_dominated(set, c.sigma2); });
  json out{{"verdict", search.index ? "dominated" : "none"},
           {"candidate", search.index ? json(set[*search.index].label()) : json(nullptr)},
           {"report", dominance_to_json(search.report, set)}};
  json all = json::array();
  for (const auto& r : search.candidates) all.push_back(dominance_to_json(r, set));
  out["candidates"] = all;
  if (c.candidate_label) {
    const std::size_t k = *set.find_label(*c.candidate_label);
    out["requested"] = dominance_to_json(search.candidates[k], set);
  }
  return out;
}

json run_simulate(const ExperimentConfig& c, const UncertaintySet& set) {
  const std::size_t cand = resolve_candidate(c, set);
  const MixtureWeights detector[] = {MixtureWeights::vertex(set.size(), cand)};
  const auto truths = all_indices(set.size());
  const auto est = stage("empirical_exponent", [&] {
    auto r = compare_detectors(set, c.sigma2, detector, truths, c.n_values, c.trials, c.alpha,
                               derive_seed(c.seed, "simulate"));
    const bool nothing = std::all_of(r[0].begin(), r[0].end(), [](const ExponentEstimate& e) {
      return std::all_of(e.censored.begin(), e.censored.end(), [](bool x) { return x; });
    });
    if (nothing) {
      fail(ErrorKind::estimation_infeasible, "every miss estimate is censored; use smaller n or more trials");
    }
    return r;
  });
  json series = json::array();
  json summary = json::array();
  for (std::size_t j = 0; j < truths.size(); ++j) {
    append_series(series, est[0][j], set[j].label());
    summary.push_back(estimate_summary(est[0][j], set[j].label()));
  }
  return {{"detector", set[cand].label()}, {"per_member", summary}, {"series", series}};
}

json run_minimax(const ExperimentConfig& c, const UncertaintySet& set) {
  const std::size_t cand = resolve_candidate(c, set);
  const auto tilts = tilt_grid(c.tilt_lo, c.tilt_points);
  json per_n = json::array();
  for (std::size_t n : c.n_values) {
    const auto models = stage("gaussian_model", [&] { return build_models(set, c.sigma2, n); });
    const auto kkt = stage("kkt_certificate", [&] { return kkt_certificate(cand, models, c.sigma2); });
    const MixtureKlObjective objective = stage("minimax", [&] {
      return MixtureKlObjective(models, c.sigma2,
                                draw_h0_samples(c.sigma2, n, c.trials, derive_seed(c.seed, "minimax", n)));
    });
    const auto opt = stage("minimize_mixture_weights", [&] {
      return minimize_mixture_weights(objective, MixtureWeights::uniform(set.size()), c.optimizer_max_iters,
                                      c.optimizer_tol);
    });
    // Saddle check at the candidate vertex: U(e, e) against the sample KL.
    const auto vertex = MixtureWeights::vertex(set.size(), cand);
    const auto u = stage("utility", [&] {
      return utility(vertex, vertex, objective, derive_seed(c.seed, "utility", n), tilts, c.trials);
    });
    per_n.push_back({{"n", n},
                     {"kkt", kkt_to_json(kkt, set)},
                     {"optimum", optimum_to_json(opt)},
                     {"saddle",
                      {{"utility", u.value},
                       {"utility_tilt", u.tilt},
                       {"utility_se", u.standard_error},
                       {"sample_kl", objective.value(vertex)},
                       {"sample_kl_se", objective.standard_error(vertex)}}}});
  }
  return {{"candidate", set[cand].label()}, {"per_n", per_n}};
}

json run_full(const ExperimentConfig& c, const UncertaintySet& set) {
  const auto search = stage("dominance", [&] { return find_dominated(set, c.sigma2); });
  json out{{"dominance",
            {{"verdict", search.index ? "dominated" : "none"},
             {"candidate", search.index ? json(set[*search.index].label()) : json(nullptr)},
             {"report", dominance_to_json(search.report, set)}}}};
  if (!search.index) {
    out["skipped"] = "no sigma2-dominated member; the remaining stages need one";
    return out;
  }
  const std::size_t cand = *search.index;
  const auto genie = stage("genie_bound", [&] { return genie_bound(set, c.sigma2); });
  out["genie"] = {{"value", genie.value}, {"argmin", set[genie.argmin_index].label()}};

  json kkt = json::array();
  for (std::size_t n : c.n_values) {
    const auto models = stage("gaussian_model", [&] { return build_models(set, c.sigma2, n); });
    const auto cert = stage("kkt_certificate", [&] { return kkt_certificate(cand, models, c.sigma2); });
    kkt.push_back({{"n", n}, {"certificate", kkt_to_json(cert, set)}});
  }
  out["kkt"] = kkt;

  // LRT of every member, the dominated one first, scored on shared samples.
  std::vector<std::size_t> order{cand};
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k != cand) order.push_back(k);
  }
  std::vector<MixtureWeights> detectors;
  for (std::size_t k : order) detectors.push_back(MixtureWeights::vertex(set.size(), k));
  const auto truths = all_indices(set.size());
  const auto est = stage("empirical_exponent", [&] {
    return compare_detectors(set, c.sigma2, detectors, truths, c.n_values, c.trials, c.alpha,
                             derive_seed(c.seed, "full"));
  });

  // Worst case over truths of the miss exponent at the largest n.
  auto worst = [&](std::size_t d) {
    double value = std::numeric_limits<double>::infinity();
    double ci = 0.0;
    for (std::size_t j = 0; j < truths.size(); ++j) {
      const auto& e = est[d][j];
      const double v = e.miss_log.back();
      if (v < value) {
        value = v;
        ci = e.censored.back() ? 0.0 : e.ci_half_width;
      }
    }
    return std::pair{value, ci};
  };
  const auto [cand_worst, cand_ci] = worst(0);
  json detectors_json = json::array();
  bool ordering = true;
  for (std::size_t d = 0; d < detectors.size(); ++d) {
    const auto [w, ci] = worst(d);
    json per_truth = json::array();
    for (std::size_t j = 0; j < truths.size(); ++j) per_truth.push_back(estimate_summary(est[d][j], set[j].label()));
    detectors_json.push_back({{"detector", set[order[d]].label()},
                              {"worst_case_miss_log", finite_or_null(w)},
                              {"ci_half_width", ci},
                              {"per_truth", per_truth}});
    if (d > 0 && cand_worst < w - 2.0 * std::max(ci, cand_ci)) ordering = false;
  }
  out["detectors"] = detectors_json;
  out["ordering_matches"] = ordering;

  json series = json::array();
  for (std::size_t j = 0; j < truths.size(); ++j) append_series(series, est[0][j], set[j].label());
  out["series"] = series;
  return out;
}

}  // namespace

bool operator==(const ReportRecord& a, const ReportRecord& b) {
  return a.mode == b.mode && a.seed == b.seed && a.toolkit_version == b.toolkit_version &&
         a.wall_time_ms == b.wall_time_ms && a.config == b.config && a.payload == b.payload;
}

json config_to_json(const ExperimentConfig& c) {
  json psds = json::array();
  for (const auto& p : c.psds) psds.push_back(psd_to_json(p));
  return {{"mode", std::string(to_string(c.mode))},
          {"grid_size", c.grid_size},
          {"sigma2", c.sigma2},
          {"alpha", c.alpha},
          {"psds", psds},
          {"candidate", c.candidate_label ? json(*c.candidate_label) : json(nullptr)},
          {"n_values", c.n_values},
          {"trials", c.trials},
          {"seed", c.seed},
          {"output", c.output_path},
          {"tilt_lo", c.tilt_lo},
          {"tilt_points", c.tilt_points},
          {"optimizer_max_iters", c.optimizer_max_iters},
          {"optimizer_tol", c.optimizer_tol},
          {"fixed",
           {{"boundedness_floor", kBoundednessFloor},
            {"margin_tolerance", kMarginTolerance},
            {"kkt_tolerance", kKktTolerance},
            {"min_miss_events", kMinMissEvents},
            {"threshold_quantile", "lower order statistic"},
            {"jitter_ladder", kJitterLadder}}}};
}

ReportRecord run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  validate(config);
  ReportRecord rec;
  rec.mode = config.mode;
  rec.seed = config.seed;
  rec.config = config_to_json(config);
  const UncertaintySet set = stage("psd", [&] { return build_set(config); });
  switch (config.mode) {
    case Mode::exponent: rec.payload = run_exponent(config, set); break;
    case Mode::dominance: rec.payload = run_dominance(config, set); break;
    case Mode::simulate: rec.payload = run_simulate(config, set); break;
    case Mode::minimax: rec.payload = run_minimax(config, set); break;
    case Mode::full: rec.payload = run_full(config, set); break;
  }
  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace robustdet
