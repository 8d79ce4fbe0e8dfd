#include "robustdet/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "robustdet/detection.hpp"
#include "robustdet/errors.hpp"

namespace robustdet {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& constraint) {
  fail(ErrorKind::config, "`" + key + "`: " + constraint);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) bad(where + key, "unknown key");
  }
}

double number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) bad(where + key, "required");
  const auto& v = obj.at(key);
  if (!v.is_number()) bad(where + key, "must be a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    bad(key, "must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

PsdSpec parse_psd(const json& block, std::size_t index) {
  const std::string where = "psds[" + std::to_string(index) + "].";
  if (!block.is_object()) bad("psds[" + std::to_string(index) + "]", "must be an object");
  if (!block.contains("label") || !block.at("label").is_string()) bad(where + "label", "required string");
  if (!block.contains("family") || !block.at("family").is_string()) bad(where + "family", "required string");
  PsdSpec spec;
  spec.label = block.at("label").get<std::string>();
  if (spec.label.empty()) bad(where + "label", "must be nonempty");
  const auto family = parse_family(block.at("family").get<std::string>());
  if (!family) bad(where + "family", "must be one of flat, raised_cosine, rational_ar1, tabulated");
  switch (*family) {
    case PsdFamily::flat:
      reject_unknown(block, {"label", "family", "level"}, where);
      spec.params = FlatParams{number(block, "level", where)};
      break;
    case PsdFamily::raised_cosine:
      reject_unknown(block, {"label", "family", "peak", "center", "width"}, where);
      spec.params = RaisedCosineParams{number(block, "peak", where), number(block, "center", where),
                                       number(block, "width", where)};
      break;
    case PsdFamily::rational_ar1:
      reject_unknown(block, {"label", "family", "variance", "pole"}, where);
      spec.params = RationalAr1Params{number(block, "variance", where), number(block, "pole", where)};
      break;
    case PsdFamily::tabulated: {
      reject_unknown(block, {"label", "family", "values"}, where);
      if (!block.contains("values") || !block.at("values").is_array()) bad(where + "values", "required array");
      TabulatedParams p;
      for (const auto& v : block.at("values")) {
        if (!v.is_number()) bad(where + "values", "entries must be numbers");
        p.values.push_back(v.get<double>());
      }
      spec.params = std::move(p);
      break;
    }
  }
  return spec;
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::exponent: return "exponent";
    case Mode::dominance: return "dominance";
    case Mode::simulate: return "simulate";
    case Mode::minimax: return "minimax";
    case Mode::full: return "full";
  }
  return "exponent";
}

std::optional<Mode> parse_mode(std::string_view name) noexcept {
  for (Mode m : {Mode::exponent, Mode::dominance, Mode::simulate, Mode::minimax, Mode::full}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, std::string("malformed config document: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::config, "config document must be a JSON object");
  reject_unknown(doc,
                 {"mode", "grid_size", "sigma2", "alpha", "psds", "candidate", "n_values", "trials", "seed",
                  "output", "tilt_lo", "tilt_points", "optimizer_max_iters", "optimizer_tol"},
                 "");

  ExperimentConfig c;
  if (doc.contains("mode")) {
    const auto& v = doc.at("mode");
    const auto m = v.is_string() ? parse_mode(v.get<std::string>()) : std::nullopt;
    if (!m) bad("mode", "must be one of exponent, dominance, simulate, minimax, full");
    c.mode = *m;
  }
  if (doc.contains("grid_size")) c.grid_size = count(doc.at("grid_size"), "grid_size");
  if (doc.contains("sigma2")) c.sigma2 = number(doc, "sigma2", "");
  if (doc.contains("alpha")) c.alpha = number(doc, "alpha", "");
  if (!doc.contains("psds") || !doc.at("psds").is_array()) bad("psds", "required array of PSD blocks");
  for (std::size_t i = 0; i < doc.at("psds").size(); ++i) c.psds.push_back(parse_psd(doc.at("psds")[i], i));
  if (doc.contains("candidate")) {
    if (!doc.at("candidate").is_string()) bad("candidate", "must be a string label");
    c.candidate_label = doc.at("candidate").get<std::string>();
  }
  if (doc.contains("n_values")) {
    if (!doc.at("n_values").is_array()) bad("n_values", "must be an array of integers");
    c.n_values.clear();
    for (const auto& v : doc.at("n_values")) c.n_values.push_back(count(v, "n_values"));
  }
  if (doc.contains("trials")) c.trials = count(doc.at("trials"), "trials");
  if (doc.contains("seed")) {
    const auto& v = doc.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      bad("seed", "must be an unsigned 64-bit integer");
    }
    c.seed = v.get<std::uint64_t>();
  }
  if (doc.contains("output")) {
    if (!doc.at("output").is_string()) bad("output", "must be a string path");
    c.output_path = doc.at("output").get<std::string>();
  }
  if (doc.contains("tilt_lo")) c.tilt_lo = number(doc, "tilt_lo", "");
  if (doc.contains("tilt_points")) c.tilt_points = count(doc.at("tilt_points"), "tilt_points");
  if (doc.contains("optimizer_max_iters")) {
    c.optimizer_max_iters = count(doc.at("optimizer_max_iters"), "optimizer_max_iters");
  }
  if (doc.contains("optimizer_tol")) c.optimizer_tol = number(doc, "optimizer_tol", "");
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.grid_size < kMinGridSize) bad("grid_size", "must be >= " + std::to_string(kMinGridSize));
  if (!(c.sigma2 > 0.0) || !std::isfinite(c.sigma2)) bad("sigma2", "must be finite and > 0");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) bad("alpha", "must lie in (0,1)");
  if (c.psds.empty()) bad("psds", "must list at least one PSD");
  std::set<std::string> labels;
  for (const auto& p : c.psds) {
    if (!labels.insert(p.label).second) bad("psds", "duplicate label \"" + p.label + "\"");
    if (const auto* t = std::get_if<TabulatedParams>(&p.params); t && t->values.size() != c.grid_size) {
      bad("psds", "tabulated PSD \"" + p.label + "\" has " + std::to_string(t->values.size()) +
                      " values but grid_size is " + std::to_string(c.grid_size));
    }
  }
  if (c.candidate_label && !labels.count(*c.candidate_label)) {
    bad("candidate", "no PSD labeled \"" + *c.candidate_label + "\"");
  }
  if (c.n_values.empty()) bad("n_values", "must be nonempty");
  for (std::size_t i = 0; i < c.n_values.size(); ++i) {
    if (c.n_values[i] == 0) bad("n_values", "entries must be >= 1");
    if (i > 0 && c.n_values[i] <= c.n_values[i - 1]) bad("n_values", "must be strictly increasing");
  }
  if ((c.mode == Mode::simulate || c.mode == Mode::minimax || c.mode == Mode::full) && c.trials < 1000) {
    bad("trials", "must be >= 1000 for simulate, minimax and full modes");
  }
  if ((c.mode == Mode::simulate || c.mode == Mode::full) && c.trials < min_calibration_trials(c.alpha)) {
    bad("trials", "must be >= " + std::to_string(min_calibration_trials(c.alpha)) + " to calibrate at alpha");
  }
  if (!(c.tilt_lo <= 0.0) || !std::isfinite(c.tilt_lo)) bad("tilt_lo", "must be finite and <= 0");
  if (c.tilt_points == 0) bad("tilt_points", "must be >= 1");
  if (!(c.optimizer_tol >= 0.0)) bad("optimizer_tol", "must be >= 0");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

UncertaintySet build_set(const ExperimentConfig& config) {
  std::vector<PsdGrid> members;
  for (const auto& p : config.psds) {
    try {
      members.push_back(make_psd(p.params, config.grid_size, p.label));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::parameter || e.kind() == ErrorKind::domain) {
        fail(ErrorKind::config, "psd \"" + p.label + "\": " + e.what());
      }
      throw;
    }
  }
  return UncertaintySet(std::move(members));
}

}  // namespace robustdet
