#pragma once

// Strict JSON experiment configuration.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "secperc/errors.hpp"
#include "secperc/estimators.hpp"
#include "secperc/model.hpp"
#include "secperc/parallel.hpp"

namespace secperc::config {

using json = nlohmann::json;

struct Geometry {
  double r = 1.0;
  int m = 10;
  double L = 20.0;
  double margin = 2.0;  // L / 10 unless given
  double n1 = 1.0;
};

struct LambdaCOptions {
  std::vector<double> L_list;  // empty: use geometry.L only
  double ratio_lo = 1.0;
  double ratio_hi = 10.0;
  double tol = 0.05;
  est::SpanningMode mode = est::SpanningMode::directed;
};

struct ExperimentConfig {
  ModelParams params;
  double lambda = 0.0;
  double lambda_e = 0.0;
  double beta = 1.0;  // power threshold of the bounded-fading events
  Geometry geometry;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  unsigned workers = parallel::default_workers();
  double truncation_tol = 1e-4;
  std::string output_dir = "results";
  LambdaCOptions lambda_c;

  est::Budget budget() const { return {trials, seed, workers, truncation_tol}; }

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return to_json(a, true) == to_json(b, true);
  }

  /// Full record; `with_runtime` adds workers and output_dir, which do not
  /// affect results.
  static json to_json(const ExperimentConfig& c, bool with_runtime);
};

namespace detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ValidationError(prefix + it.key(), "unknown key");
}

inline double number(const json& obj, const char* key, const std::string& field, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(field, "must be finite");
  return x;
}

inline std::uint64_t count(const json& obj, const char* key, const std::string& field,
                           std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ValidationError(field, "must be a non-negative integer");
}

inline std::string text(const json& obj, const char* key, const std::string& field,
                        const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ValidationError(field, "must be a string");
  return v.get<std::string>();
}

inline const json& object(const json& obj, const char* key, const std::string& field) {
  static const json empty = json::object();
  if (!obj.contains(key)) return empty;
  const json& v = obj.at(key);
  if (!v.is_object()) throw ValidationError(field, "must be an object");
  return v;
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  const ModelParams& p = c.params;
  if (!(p.alpha > 2.0)) throw ValidationError("alpha", "must exceed 2");
  if (!(p.power > 0.0)) throw ValidationError("power", "must be positive");
  if (!(p.gamma >= 0.0)) throw ValidationError("gamma", "must be non-negative");
  if (p.fading.kind == FadingKind::bounded_exponential && !(p.fading.kappa > 0.0))
    throw ValidationError("fading.kappa", "must be positive");
  if (!(p.g_cap > 0.0)) throw ValidationError("tolerances.g_cap", "must be positive");
  if (!(c.lambda >= 0.0)) throw ValidationError("lambda", "must be non-negative");
  if (!(c.lambda_e >= 0.0)) throw ValidationError("lambda_e", "must be non-negative");
  if (!(c.beta > 0.0)) throw ValidationError("beta", "must be positive");
  const Geometry& g = c.geometry;
  if (!(g.r > 0.0)) throw ValidationError("geometry.r", "must be positive");
  if (g.m < 1 || g.m > 100) throw ValidationError("geometry.m", "must lie in 1..100");
  if (!(g.L > 0.0)) throw ValidationError("geometry.L", "must be positive");
  if (!(g.margin > 0.0 && g.margin < g.L / 4.0))
    throw ValidationError("geometry.margin", "must lie in (0, L/4)");
  if (!(g.n1 >= 0.0)) throw ValidationError("geometry.n1", "must be non-negative");
  if (c.trials < 1) throw ValidationError("trials", "must be at least 1");
  if (c.workers < 1) throw ValidationError("workers", "must be at least 1");
  if (!(c.truncation_tol > 0.0 && c.truncation_tol < 1.0))
    throw ValidationError("tolerances.truncation_tol", "must lie in (0, 1)");
  const LambdaCOptions& lc = c.lambda_c;
  if (!(lc.ratio_lo > 0.0 && lc.ratio_hi > lc.ratio_lo))
    throw ValidationError("lambda_c.ratio_bracket", "must satisfy 0 < lo < hi");
  if (!(lc.tol > 0.0)) throw ValidationError("lambda_c.tol", "must be positive");
  for (double L : lc.L_list)
    if (!(L > 0.0)) throw ValidationError("lambda_c.L_list", "entries must be positive");
}

inline ExperimentConfig from_json(const json& root) {
  if (!root.is_object()) throw ValidationError("<root>", "config must be a JSON object");
  detail::reject_unknown(root,
                         {"model", "alpha", "power", "gamma", "fading", "lambda", "lambda_e", "beta",
                          "geometry", "trials", "seed", "workers", "tolerances", "output_dir",
                          "lambda_c"},
                         "");
  ExperimentConfig c;

  if (!root.contains("model")) throw ValidationError("model", "is required");
  const std::string model = detail::text(root, "model", "model", "");
  if (model != "pathloss" && model != "fading")
    throw ValidationError("model", "must be \"pathloss\" or \"fading\"");

  c.params.alpha = detail::number(root, "alpha", "alpha", 4.0);
  c.params.power = detail::number(root, "power", "power", 1.0);
  c.params.gamma = detail::number(root, "gamma", "gamma", 0.0);

  const json& fading = detail::object(root, "fading", "fading");
  detail::reject_unknown(fading, {"type", "kappa"}, "fading.");
  const std::string ftype =
      detail::text(fading, "type", "fading.type", model == "fading" ? "exponential" : "none");
  if (ftype == "none") c.params.fading.kind = FadingKind::none;
  else if (ftype == "exponential") c.params.fading.kind = FadingKind::exponential;
  else if (ftype == "bounded") c.params.fading.kind = FadingKind::bounded_exponential;
  else throw ValidationError("fading.type", "must be none, exponential or bounded");
  c.params.fading.kappa = detail::number(fading, "kappa", "fading.kappa", 16.0);
  if (model == "pathloss" && c.params.fading.kind != FadingKind::none)
    throw ValidationError("fading.type", "must be none for the pathloss model");
  if (model == "fading" && c.params.fading.kind == FadingKind::none)
    throw ValidationError("fading.type", "must not be none for the fading model");

  if (!root.contains("lambda")) throw ValidationError("lambda", "is required");
  if (!root.contains("lambda_e")) throw ValidationError("lambda_e", "is required");
  c.lambda = detail::number(root, "lambda", "lambda", 0.0);
  c.lambda_e = detail::number(root, "lambda_e", "lambda_e", 0.0);
  c.beta = detail::number(root, "beta", "beta", 1.0);

  const json& geo = detail::object(root, "geometry", "geometry");
  detail::reject_unknown(geo, {"r", "m", "L", "margin", "n1"}, "geometry.");
  c.geometry.r = detail::number(geo, "r", "geometry.r", 1.0);
  const std::uint64_t m = detail::count(geo, "m", "geometry.m", 10);
  if (m > 100) throw ValidationError("geometry.m", "must lie in 1..100");
  c.geometry.m = static_cast<int>(m);
  c.geometry.L = detail::number(geo, "L", "geometry.L", 20.0);
  c.geometry.margin = detail::number(geo, "margin", "geometry.margin", c.geometry.L / 10.0);
  c.geometry.n1 = detail::number(geo, "n1", "geometry.n1", 1.0);

  c.trials = detail::count(root, "trials", "trials", 10000);
  if (!root.contains("seed")) throw ValidationError("seed", "is required");
  c.seed = detail::count(root, "seed", "seed", 0);
  const std::uint64_t workers = detail::count(root, "workers", "workers", parallel::default_workers());
  if (workers > 4096) throw ValidationError("workers", "must be at most 4096");
  c.workers = static_cast<unsigned>(workers);

  const json& tol = detail::object(root, "tolerances", "tolerances");
  detail::reject_unknown(tol, {"truncation_tol", "g_cap"}, "tolerances.");
  c.truncation_tol = detail::number(tol, "truncation_tol", "tolerances.truncation_tol", 1e-4);
  c.params.g_cap = detail::number(tol, "g_cap", "tolerances.g_cap", 40.0);

  c.output_dir = detail::text(root, "output_dir", "output_dir", "results");

  const json& lc = detail::object(root, "lambda_c", "lambda_c");
  detail::reject_unknown(lc, {"L_list", "ratio_bracket", "tol", "mode"}, "lambda_c.");
  if (lc.contains("L_list")) {
    const json& v = lc.at("L_list");
    if (!v.is_array()) throw ValidationError("lambda_c.L_list", "must be an array of numbers");
    for (const json& x : v) {
      if (!x.is_number()) throw ValidationError("lambda_c.L_list", "must be an array of numbers");
      c.lambda_c.L_list.push_back(x.get<double>());
    }
  }
  if (lc.contains("ratio_bracket")) {
    const json& v = lc.at("ratio_bracket");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ValidationError("lambda_c.ratio_bracket", "must be [lo, hi]");
    c.lambda_c.ratio_lo = v[0].get<double>();
    c.lambda_c.ratio_hi = v[1].get<double>();
  }
  c.lambda_c.tol = detail::number(lc, "tol", "lambda_c.tol", 0.05);
  const std::string mode = detail::text(lc, "mode", "lambda_c.mode", "directed");
  if (mode == "directed") c.lambda_c.mode = est::SpanningMode::directed;
  else if (mode == "either") c.lambda_c.mode = est::SpanningMode::either;
  else throw ValidationError("lambda_c.mode", "must be directed or either");

  validate(c);
  return c;
}

/// Parses a config from a file path, or from inline JSON text when `source`
/// starts with '{' or '['.
inline ExperimentConfig parse_config(const std::string& source) {
  std::string body;
  const auto first = source.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (source[first] == '{' || source[first] == '[')) {
    body = source;
  } else {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw IoError("cannot read config file: " + source);
    std::ostringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  json root;
  try {
    root = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ValidationError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return from_json(root);
}

inline json ExperimentConfig::to_json(const ExperimentConfig& c, bool with_runtime) {
  json j;
  j["model"] = c.params.is_fading() ? "fading" : "pathloss";
  j["alpha"] = c.params.alpha;
  j["power"] = c.params.power;
  j["gamma"] = c.params.gamma;
  j["fading"] = {{"type", to_string(c.params.fading.kind)}, {"kappa", c.params.fading.kappa}};
  j["lambda"] = c.lambda;
  j["lambda_e"] = c.lambda_e;
  j["beta"] = c.beta;
  j["geometry"] = {{"r", c.geometry.r},           {"m", c.geometry.m}, {"L", c.geometry.L},
                   {"margin", c.geometry.margin}, {"n1", c.geometry.n1}};
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["tolerances"] = {{"truncation_tol", c.truncation_tol}, {"g_cap", c.params.g_cap}};
  j["lambda_c"] = {{"L_list", c.lambda_c.L_list},
                   {"ratio_bracket", {c.lambda_c.ratio_lo, c.lambda_c.ratio_hi}},
                   {"tol", c.lambda_c.tol},
                   {"mode", est::to_string(c.lambda_c.mode)}};
  if (with_runtime) {
    j["workers"] = c.workers;
    j["output_dir"] = c.output_dir;
  }
  return j;
}

}  // namespace secperc::config
