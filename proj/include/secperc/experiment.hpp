#pragma once

// Subcommand dispatch and result persistence for the command-line tool.
// Results go to <output_dir>/<subcommand>-<seed>/ as data.csv, summary.json
// and manifest.json. Everything except the manifest timestamp is a pure
// function of the config.

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "secperc/analytic.hpp"
#include "secperc/config.hpp"
#include "secperc/errors.hpp"
#include "secperc/estimators.hpp"
#include "secperc/secrecy_graph.hpp"
#include "secperc/stats.hpp"

namespace secperc::experiment {

using json = nlohmann::json;
using config::ExperimentConfig;

inline constexpr const char* kToolVersion = "secperc 0.1.0";

/// Shortest decimal string that parses back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t v) { return std::to_string(v); }

/// Fixed 17-significant-digit form, used by the edge-list dump.
inline std::string format_17(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool empty() const { return header.empty(); }

  std::string render() const {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

inline const std::vector<std::string>& event_header() {
  static const std::vector<std::string> h{"event",  "model",  "lambda", "lambda_e",
                                          "alpha",  "param",  "trials", "successes",
                                          "p_hat",  "ci_lo",  "ci_hi",  "seed"};
  return h;
}

inline std::vector<std::string> event_row(const std::string& event, const std::string& model,
                                          double lambda, double lambda_e, double alpha,
                                          double param, const stats::EventEstimate& e) {
  return {event,
          model,
          format_number(lambda),
          format_number(lambda_e),
          format_number(alpha),
          format_number(param),
          format_number(e.trials),
          format_number(e.successes),
          format_number(e.p_hat),
          format_number(e.ci_low),
          format_number(e.ci_high),
          format_number(e.seed)};
}

inline json to_json(const stats::EventEstimate& e) {
  json params = json::object();
  for (const auto& [k, v] : e.params) params[k] = v;
  return {{"trials", e.trials},   {"successes", e.successes}, {"p_hat", e.p_hat},
          {"ci_low", e.ci_low},   {"ci_high", e.ci_high},     {"standard_error", e.standard_error()},
          {"seed", e.seed},       {"params", params}};
}

inline json to_json(const stats::ScalarEstimate& s) {
  return {{"samples", s.samples}, {"mean", s.mean},       {"standard_error", s.standard_error},
          {"ci_low", s.ci_low},   {"ci_high", s.ci_high}, {"seed", s.seed}};
}

inline json to_json(const analytic::Constants& c) {
  return {{"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"c", c.c}, {"k_count", c.k_count},
          {"l_count", c.l_count}};
}

inline json to_json(const analytic::GridBound& g) {
  return {{"epsilon", g.epsilon}, {"n1", g.n1}, {"value", g.value}};
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw InternalError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

enum class Subcommand { bounds, estimate, sweep, lambda_c, graph, verify };

inline const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::bounds: return "bounds";
    case Subcommand::estimate: return "estimate";
    case Subcommand::sweep: return "sweep";
    case Subcommand::lambda_c: return "lambda-c";
    case Subcommand::graph: return "graph";
    case Subcommand::verify: return "verify";
  }
  return "unknown";
}

struct Request {
  Subcommand subcommand = Subcommand::bounds;
  std::string event = "B";        // estimate, sweep
  std::string sweep_param = "lambda";
  std::vector<double> sweep_values;
  std::string suite = "closed-forms";  // verify
};

/// In-memory result of one subcommand.
struct RunOutput {
  json results = json::object();
  CsvTable data;
  std::vector<std::pair<std::string, std::string>> extra_files;  // name, content
  bool all_passed = true;  // verify suites only
};

struct ResultManifest {
  std::string tool_version;
  std::string timestamp;
  json config_echo;
  std::vector<std::pair<std::string, std::string>> outputs;  // file name, sha256
  std::filesystem::path directory;

  json to_json() const {
    json outs = json::array();
    for (const auto& [name, digest] : outputs) outs.push_back({{"file", name}, {"sha256", digest}});
    return {{"tool_version", tool_version},
            {"timestamp", timestamp},
            {"config_echo", config_echo},
            {"outputs", outs}};
  }
};

namespace detail {

inline std::string model_name(const ExperimentConfig& c) { return to_string(c.params.model()); }

inline const std::vector<std::string>& event_names() {
  static const std::vector<std::string> names{"B", "Ac", "Gc", "Q", "rho2", "DeDl", "DeltaGamma", "span"};
  return names;
}

struct EventResult {
  json results;
  std::vector<std::string> row;
};

// One estimate for `event` at the config's parameters.
inline EventResult run_event(const std::string& event, const ExperimentConfig& c) {
  const est::Budget budget = c.budget();
  const std::string model = model_name(c);
  const double alpha = c.params.alpha;
  if (event == "B") {
    const auto e = est::estimate_event_B(c.lambda, c.lambda_e, c.geometry.r, c.params, budget);
    return {{{"event", "B"}, {"estimate", to_json(e)}},
            event_row("B", model, c.lambda, c.lambda_e, alpha, c.geometry.r, e)};
  }
  if (event == "Ac") {
    const auto e = est::estimate_event_A_complement(c.lambda, c.lambda_e, c.geometry.m,
                                                    c.geometry.r, budget);
    return {{{"event", "Ac"}, {"m", c.geometry.m}, {"estimate", to_json(e)}},
            event_row("Ac", model, c.lambda, c.lambda_e, alpha, c.geometry.r, e)};
  }
  if (event == "Gc" || event == "Q") {
    const auto kind = event == "Q" ? est::FadingEvent::Q : est::FadingEvent::G_complement;
    const auto e = est::estimate_fading_events(kind, c.lambda, c.lambda_e, c.beta,
                                               c.params.fading.kappa, alpha, budget, c.params.g_cap);
    return {{{"event", event},
             {"eta", analytic::eta(c.params.fading.kappa, c.beta, alpha)},
             {"estimate", to_json(e)}},
            event_row(event, "fading", c.lambda, c.lambda_e, alpha, c.beta, e)};
  }
  if (event == "DeDl") {
    const auto e = est::estimate_prob_De_lt_Dl(c.lambda, c.lambda_e, c.geometry.n1, budget);
    return {{{"event", "DeDl"},
             {"closed_form", analytic::prob_De_lt_Dl_closed(c.lambda, c.lambda_e, c.geometry.n1)},
             {"estimate", to_json(e)}},
            event_row("DeDl", model, c.lambda, c.lambda_e, alpha, c.geometry.n1, e)};
  }
  if (event == "DeltaGamma") {
    const double r_max =
        analytic::required_power_radius(c.lambda, c.lambda_e, alpha, c.truncation_tol);
    const auto e = est::estimate_prob_Delta_gt_Gamma(c.lambda, c.lambda_e, alpha, c.geometry.n1,
                                                     r_max, budget);
    return {{{"event", "DeltaGamma"},
             {"r_max", r_max},
             {"closed_form",
              analytic::prob_Delta_gt_Gamma_closed(c.lambda, c.lambda_e, alpha, c.geometry.n1)},
             {"estimate", to_json(e)}},
            event_row("DeltaGamma", "fading", c.lambda, c.lambda_e, alpha, c.geometry.n1, e)};
  }
  if (event == "span") {
    const auto e = est::estimate_spanning(c.lambda, c.lambda_e, c.geometry.L, c.geometry.margin,
                                          c.params, c.lambda_c.mode, budget);
    return {{{"event", "span"}, {"mode", est::to_string(c.lambda_c.mode)}, {"estimate", to_json(e)}},
            event_row("span", model, c.lambda, c.lambda_e, alpha, c.geometry.L, e)};
  }
  throw ParameterError("unknown event: " + event);
}

inline std::vector<std::string> param_comments(const std::string& event) {
  static const std::map<std::string, std::string> meaning{
      {"B", "r"}, {"Ac", "r"}, {"Gc", "beta"}, {"Q", "beta"}, {"DeDl", "n1"},
      {"DeltaGamma", "n1"}, {"span", "L"}};
  const auto it = meaning.find(event);
  return {"event " + event + "; param column = " + (it == meaning.end() ? "-" : it->second)};
}

inline RunOutput run_rho2(const ExperimentConfig& c) {
  const auto s = est::estimate_mean_rho_sq(c.lambda_e, c.trials, c.budget());
  const double expected = analytic::RhoLaw(c.lambda_e).mean_sq();
  RunOutput out;
  out.results = {{"event", "rho2"}, {"expected", expected}, {"estimate", to_json(s)}};
  out.data.comments = {"mean of squared nearest-eavesdropper distance"};
  out.data.header = {"event", "lambda_e", "samples", "mean", "se", "ci_lo", "ci_hi", "expected", "seed"};
  out.data.rows.push_back({"rho2", format_number(c.lambda_e), format_number(s.samples),
                           format_number(s.mean), format_number(s.standard_error),
                           format_number(s.ci_low), format_number(s.ci_high),
                           format_number(expected), format_number(s.seed)});
  return out;
}

inline RunOutput run_estimate(const ExperimentConfig& c, const Request& req) {
  if (req.event == "rho2") return run_rho2(c);
  EventResult r = run_event(req.event, c);
  RunOutput out;
  out.results = std::move(r.results);
  out.data.comments = param_comments(req.event);
  out.data.header = event_header();
  out.data.rows.push_back(std::move(r.row));
  return out;
}

inline RunOutput run_sweep(const ExperimentConfig& c, const Request& req) {
  if (req.sweep_values.empty()) throw ParameterError("sweep needs at least one value");
  if (req.event == "rho2") throw ParameterError("sweep does not support the rho2 event");
  std::vector<double> values = req.sweep_values;
  std::sort(values.begin(), values.end());
  RunOutput out;
  out.data.comments = param_comments(req.event);
  out.data.comments.push_back("sweep over " + req.sweep_param);
  out.data.header = event_header();
  json rows = json::array();
  for (double v : values) {
    ExperimentConfig point = c;
    if (req.sweep_param == "lambda") point.lambda = v;
    else if (req.sweep_param == "lambda_e") point.lambda_e = v;
    else if (req.sweep_param == "r") point.geometry.r = v;
    else if (req.sweep_param == "beta") point.beta = v;
    else if (req.sweep_param == "n1") point.geometry.n1 = v;
    else throw ParameterError("unsupported sweep parameter: " + req.sweep_param);
    config::validate(point);
    EventResult r = run_event(req.event, point);
    r.results["value"] = v;
    rows.push_back(std::move(r.results));
    out.data.rows.push_back(std::move(r.row));
  }
  out.results = {{"event", req.event}, {"param", req.sweep_param}, {"points", rows}};
  return out;
}

inline RunOutput run_bounds(const ExperimentConfig& c) {
  const auto eps = analytic::default_epsilon_grid();
  const auto n1 = analytic::default_n1_grid();
  const auto r = analytic::bounds_report(c.lambda_e, c.params.alpha, c.params.fading.kappa,
                                         analytic::covering_constants(), eps, n1);
  RunOutput out;
  out.results = {{"lambda_e", r.lambda_e},
                 {"alpha", r.alpha},
                 {"kappa", r.kappa},
                 {"constants", to_json(r.constants)},
                 {"theorem1_lower", r.theorem1_lower},
                 {"theorem3_lower", r.theorem3_lower},
                 {"theorem2_upper", to_json(r.theorem2_upper)},
                 {"theorem4_upper", to_json(r.theorem4_upper)},
                 {"nu", r.nu_at_best.nu},
                 {"nu1", r.nu_at_best.nu1}};
  out.data.comments = {"upper bounds over the (epsilon, n1) grid",
                       "theorem1_lower=" + format_number(r.theorem1_lower) +
                           " theorem3_lower=" + format_number(r.theorem3_lower)};
  out.data.header = {"bound", "epsilon", "n1", "value"};
  for (const auto& g : r.theorem2_grid)
    out.data.rows.push_back({"theorem2_upper", format_number(g.epsilon), format_number(g.n1),
                             format_number(g.value)});
  for (const auto& g : r.theorem4_grid)
    out.data.rows.push_back({"theorem4_upper", format_number(g.epsilon), format_number(g.n1),
                             format_number(g.value)});
  return out;
}

inline RunOutput run_lambda_c(const ExperimentConfig& c) {
  est::LambdaCSearch search;
  search.half_widths = c.lambda_c.L_list.empty() ? std::vector<double>{c.geometry.L} : c.lambda_c.L_list;
  search.margin_fraction = c.geometry.margin / c.geometry.L;
  search.ratio_lo = c.lambda_c.ratio_lo;
  search.ratio_hi = c.lambda_c.ratio_hi;
  search.tol = c.lambda_c.tol;
  search.mode = c.lambda_c.mode;
  const auto est = est::estimate_lambda_c(c.lambda_e, c.params, search, c.budget());

  RunOutput out;
  out.data.comments = {"spanning curves; param column = L, lambda = ratio * lambda_e"};
  out.data.header = event_header();
  json windows = json::array();
  for (const auto& w : est.curves) {
    json curve = json::array();
    for (const auto& p : w.curve) {
      curve.push_back({{"ratio", p.ratio}, {"estimate", to_json(p.estimate)}});
      out.data.rows.push_back(event_row("span", model_name(c), p.ratio * c.lambda_e, c.lambda_e,
                                        c.params.alpha, w.half_width, p.estimate));
    }
    windows.push_back({{"L", w.half_width},
                       {"crossing", w.crossing},
                       {"crossing_ci", {w.crossing_ci.low, w.crossing_ci.high}},
                       {"curve", curve}});
  }
  out.results = {{"lambda_e", est.lambda_e},
                 {"ratio_hat", est.ratio_hat},
                 {"ratio_ci", {est.ratio_ci.low, est.ratio_ci.high}},
                 {"window_halfwidths", est.window_halfwidths},
                 {"mode", est::to_string(c.lambda_c.mode)},
                 {"windows", windows}};
  return out;
}

inline RunOutput run_graph(const ExperimentConfig& c) {
  const est::Budget b = c.budget();
  const rng::Stream s(c.seed, 0);
  const geom::Window window = geom::Window::square(c.geometry.L);
  const double expected = c.lambda * window.area();
  const geom::Window eaves_window =
      window.padded(est::detail::eaves_pad(c.lambda_e, c.params, b.truncation_tol, expected));
  const auto legit = geom::sample_ppp(c.lambda, window, s.split(est::kLegitTag));
  const auto eaves = geom::sample_ppp(c.lambda_e, eaves_window, s.split(est::kEavesTag));
  const std::uint64_t fade_seed = s.split(est::kFadeTag).key();
  const auto g = graph::build_graph(legit, eaves, c.params, fade_seed);

  json nodes = json::array(), eaves_pts = json::array(), edges = json::array();
  for (const auto& p : g.nodes) nodes.push_back({p.x, p.y});
  for (const auto& p : g.eaves) eaves_pts.push_back({p.x, p.y});
  std::string csv = "src,dst,length\n";
  for (graph::NodeId i = 0; i < g.size(); ++i) {
    for (graph::NodeId j : g.adjacency[i]) {
      edges.push_back({i, j});
      csv += std::to_string(i) + "," + std::to_string(j) + "," +
             format_17(geom::distance(g.nodes[i], g.nodes[j])) + "\n";
    }
  }
  const json dump = {{"params", ExperimentConfig::to_json(c, false)},
                     {"nodes", nodes},
                     {"eaves", eaves_pts},
                     {"edges", edges},
                     {"seed", c.seed}};
  RunOutput out;
  out.results = {{"nodes", g.size()}, {"eaves", g.eaves.size()}, {"edges", g.edge_count()},
                 {"fade_seed", fade_seed}};
  out.extra_files.push_back({"graph.json", dump.dump(1) + "\n"});
  out.extra_files.push_back({"edges.csv", csv});
  return out;
}

// --- verify suites --------------------------------------------------------

struct CheckTable {
  RunOutput out;

  CheckTable() { out.data.header = {"check", "value", "expected", "tolerance", "passed"}; }

  void add(const std::string& name, double value, double expected, double tol, bool passed) {
    out.data.rows.push_back({name, format_number(value), format_number(expected),
                             format_number(tol), passed ? "1" : "0"});
    out.results["checks"].push_back({{"check", name}, {"value", value}, {"expected", expected},
                                     {"tolerance", tol}, {"passed", passed}});
    out.all_passed = out.all_passed && passed;
  }
  void near(const std::string& name, double value, double expected, double tol) {
    add(name, value, expected, tol, std::fabs(value - expected) <= tol);
  }
  RunOutput finish(const std::string& suite) {
    out.results["suite"] = suite;
    out.results["all_passed"] = out.all_passed;
    out.data.comments.insert(out.data.comments.begin(), "verify suite " + suite);
    return std::move(out);
  }
};

inline RunOutput verify_closed_forms(const ExperimentConfig& c) {
  constexpr double pi = std::numbers::pi;
  CheckTable t;
  const analytic::RhoLaw rho(1.0);
  t.near("rho.mean_sq(1)", rho.mean_sq(), 1.0 / pi, 1e-12);
  t.near("rho.tail_sq(0)", rho.tail_sq(0.0), rho.mean_sq(), 1e-12);
  t.near("rho.tail_sq(1)", rho.tail_sq(1.0), std::exp(-pi) * (1.0 + 1.0 / pi), 1e-12);
  t.near("De_lt_Dl(1,0.5,1)", analytic::prob_De_lt_Dl_closed(1.0, 0.5, 1.0), 0.861413, 5e-7);
  t.near("De_lt_Dl(1,1,0)", analytic::prob_De_lt_Dl_closed(1.0, 1.0, 0.0), 0.5, 1e-15);
  for (double alpha : {2.5, 3.0, 4.0, 6.0}) {
    for (double n1 : {0.0, 1.0, 5.0}) {
      const auto a = analytic::nu_integrals(alpha, n1);
      const auto q = analytic::nu_integrals_quadrature(alpha, n1);
      const std::string tag = "(" + format_number(alpha) + "," + format_number(n1) + ")";
      t.near("nu1 quadrature" + tag, q.nu1, a.nu1, 1e-10 * a.nu1);
    }
  }
  t.near("nu(4)", analytic::nu_integrals(4.0, 0.0).nu, 2.784164, 5e-7);
  t.near("Delta_gt_Gamma(1,1,4,1)", analytic::prob_Delta_gt_Gamma_closed(1, 1, 4, 1), 0.63598, 5e-6);
  t.near("Delta_gt_Gamma(1,1,4,0)", analytic::prob_Delta_gt_Gamma_closed(1, 1, 4, 0), 0.5, 1e-15);
  const auto k = analytic::covering_constants();
  t.near("C3 = |K||L|", k.c3, static_cast<double>(k.k_count * k.l_count), 0.0);
  t.near("C", k.c, std::max({400.0, 400.0, k.c3}), 0.0);
  t.near("pathloss_upper_bound(1,0.5,1)",
         analytic::supercritical_upper_bound(Model::path_loss, 1.0, 0.5, 1.0, 4.0), 1.02208, 5e-6);
  t.near("eta(16,1,4)", analytic::eta(16, 1, 4), 2.0, 1e-15);
  const auto w = stats::wilson_interval(50, 100, 1.96);
  t.near("wilson(50,100).low", w.low, 0.40383, 5e-6);
  t.near("wilson(50,100).high", w.high, 0.59617, 5e-6);

  // Monte Carlo against closed forms, at the config's seed and trial count.
  est::Budget b = c.budget();
  const auto r2 = est::estimate_mean_rho_sq(1.0, std::max<std::uint64_t>(c.trials, 100), b);
  t.near("mc rho2(1)", r2.mean, 1.0 / pi, 3.0 * r2.standard_error);
  const auto dd = est::estimate_prob_De_lt_Dl(1.0, 0.5, 1.0, b);
  t.near("mc De_lt_Dl(1,0.5,1)", dd.p_hat, analytic::prob_De_lt_Dl_closed(1.0, 0.5, 1.0),
         3.0 * std::max(dd.standard_error(), 1.0 / static_cast<double>(dd.trials)));
  const auto xs = est::sample_excess_distance(1.0, 1.0, c.trials, b);
  const double ks = stats::ks_distance(xs, [](double x) { return analytic::excess_distance_cdf(1.0, 1.0, x); });
  const double ks_tol = 1.5 * 1.36 / std::sqrt(static_cast<double>(c.trials));
  t.add("ks excess distance", ks, 0.0, ks_tol, ks < ks_tol);
  return t.finish("closed-forms");
}

inline bool same_graph(const graph::SecrecyGraph& a, const graph::SecrecyGraph& b) {
  return a.adjacency == b.adjacency;
}

inline RunOutput verify_invariants(const ExperimentConfig& c) {
  CheckTable t;
  constexpr int kInstances = 50;
  int brute_fail = 0, scale_fail = 0, eaves_fail = 0, gamma_fail = 0, order_fail = 0;
  for (int k = 0; k < kInstances; ++k) {
    const rng::Stream s(c.seed, static_cast<std::uint64_t>(k));
    const auto w = geom::Window::square(3.0);
    const auto legit = geom::sample_ppp(4.0, w, s.split(1));
    const auto eaves = geom::sample_ppp(1.0, w.padded(3.0), s.split(2));
    ModelParams pl;
    ModelParams fd;
    fd.fading.kind = FadingKind::exponential;
    const auto g = graph::build_graph(legit, eaves, pl, 0);
    const auto gf = graph::build_graph(legit, eaves, fd, 99);

    // Brute-force predicate evaluation.
    bool ok = true;
    for (graph::NodeId i = 0; i < g.size(); ++i)
      for (graph::NodeId j = 0; j < g.size(); ++j)
        if (i != j && (graph::edge_exists(g, i, j) != g.has_edge(i, j) ||
                       graph::edge_exists(gf, i, j) != gf.has_edge(i, j)))
          ok = false;
    brute_fail += !ok;

    // Scaling all coordinates by 2 (exact in binary floating point).
    geom::PPPSample l2 = legit, e2 = eaves;
    for (auto& p : l2.points) p = 2.0 * p;
    for (auto& p : e2.points) p = 2.0 * p;
    l2.window = geom::Window::square(6.0);
    e2.window = geom::Window::square(12.0);
    scale_fail += !same_graph(g, graph::build_graph(l2, e2, pl, 0));

    // One extra eavesdropper never adds an edge.
    geom::PPPSample e3 = eaves;
    e3.points.push_back({0.123, -0.456});
    const auto g3 = graph::build_graph(legit, e3, pl, 0);
    for (graph::NodeId i = 0; i < g.size(); ++i)
      for (graph::NodeId j : g3.adjacency[i])
        if (!g.has_edge(i, j)) { ++eaves_fail; i = g.size() - 1; break; }

    // Raising gamma never adds an edge.
    ModelParams pg = pl;
    pg.gamma = 0.5;
    const auto gg = graph::build_graph(legit, eaves, pg, 0);
    for (graph::NodeId i = 0; i < g.size(); ++i)
      for (graph::NodeId j : gg.adjacency[i])
        if (!g.has_edge(i, j)) { ++gamma_fail; i = g.size() - 1; break; }

    // Fading adjacency does not depend on node processing order.
    std::vector<graph::NodeId> reversed(legit.size());
    for (graph::NodeId i = 0; i < legit.size(); ++i) reversed[i] = static_cast<graph::NodeId>(legit.size() - 1 - i);
    graph::BuildOptions rev;
    rev.order = reversed;
    order_fail += !same_graph(gf, graph::build_graph(legit, eaves, fd, 99, rev));
  }
  t.add("brute-force adjacency", brute_fail, 0, 0, brute_fail == 0);
  t.add("scale invariance", scale_fail, 0, 0, scale_fail == 0);
  t.add("eavesdropper monotonicity", eaves_fail, 0, 0, eaves_fail == 0);
  t.add("gamma monotonicity", gamma_fail, 0, 0, gamma_fail == 0);
  t.add("fading order independence", order_fail, 0, 0, order_fail == 0);

  // Worker-count independence of an estimator.
  est::Budget one = c.budget();
  one.trials = std::min<std::uint64_t>(c.trials, 500);
  one.workers = 1;
  est::Budget many = one;
  many.workers = 3;
  const auto a = est::estimate_event_B(0.5, 1.0, 1.0, {}, one);
  const auto b = est::estimate_event_B(0.5, 1.0, 1.0, {}, many);
  t.add("worker independence", static_cast<double>(a.successes), static_cast<double>(b.successes),
        0, a.successes == b.successes);
  return t.finish("invariants");
}

inline RunOutput verify_recursion(const ExperimentConfig& c) {
  CheckTable t;
  const auto k = analytic::covering_constants();
  const auto rec = est::check_recursion_inequality(c.lambda, c.lambda_e, c.geometry.r, k.c3, c.budget());
  t.add("recursion inequality", rec.lhs_low, rec.rhs_high, 0, rec.satisfied);
  const auto tr = est::estimate_transform_check(c.lambda, c.lambda_e, c.geometry.r, c.budget());
  const double joint_se = std::sqrt(tr.b.standard_error() * tr.b.standard_error() +
                                    tr.a_complement.standard_error() * tr.a_complement.standard_error());
  t.add("escape <= B + Ac", tr.escape.p_hat, tr.b.p_hat + tr.a_complement.p_hat, 3.0 * joint_se,
        tr.escape.p_hat <= tr.b.p_hat + tr.a_complement.p_hat + 3.0 * joint_se);
  t.add("escape pathwise violations", static_cast<double>(tr.pathwise_violations), 0, 0,
        tr.pathwise_violations == 0);
  const double rs[] = {1.0, 5.0, 10.0};
  const auto prem = est::estimate_gourre_premises(c.lambda_e, k.c, rs, c.budget());
  for (std::size_t i = 0; i < prem.f.size(); ++i) {
    const std::string at = "(r=" + format_number(prem.f[i].x) + ")";
    t.add("premise f <= 1/2 " + at, prem.f[i].value, 0.5, 0, prem.f[i].value <= 0.5);
    t.add("premise g <= 1/4 " + at, prem.g[i].value, 0.25, 0, prem.g[i].value <= 0.25);
  }
  RunOutput out = t.finish("recursion");
  out.results["recursion"] = {{"b_large", to_json(rec.b_large)},
                              {"b_small", to_json(rec.b_small)},
                              {"a_complement", to_json(rec.a_complement)},
                              {"c3", rec.c3},
                              {"lhs", rec.lhs},
                              {"rhs", rec.rhs}};
  return out;
}

inline RunOutput run_verify(const ExperimentConfig& c, const Request& req) {
  if (req.suite == "closed-forms") return verify_closed_forms(c);
  if (req.suite == "invariants") return verify_invariants(c);
  if (req.suite == "recursion") return verify_recursion(c);
  throw ParameterError("unknown verify suite: " + req.suite);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
  if (!f.flush()) throw IoError("write failed: " + path.string());
}

}  // namespace detail

/// Computes the results of one subcommand without touching the file system.
inline RunOutput compute(const ExperimentConfig& c, const Request& req) {
  switch (req.subcommand) {
    case Subcommand::bounds: return detail::run_bounds(c);
    case Subcommand::estimate: return detail::run_estimate(c, req);
    case Subcommand::sweep: return detail::run_sweep(c, req);
    case Subcommand::lambda_c: return detail::run_lambda_c(c);
    case Subcommand::graph: return detail::run_graph(c);
    case Subcommand::verify: return detail::run_verify(c, req);
  }
  throw InternalError("unhandled subcommand");
}

/// Writes data.csv, summary.json, any extra files and manifest.json into
/// <output_dir>/<subcommand>-<seed>/.
inline ResultManifest emit_outputs(const ExperimentConfig& c, const Request& req,
                                   const RunOutput& run) {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::path(c.output_dir) / (std::string(to_string(req.subcommand)) + "-" + std::to_string(c.seed));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  ResultManifest m;
  m.tool_version = kToolVersion;
  m.timestamp = detail::utc_timestamp();
  m.config_echo = ExperimentConfig::to_json(c, true);
  m.directory = dir;
  auto put = [&](const std::string& name, const std::string& content) {
    detail::write_file(dir / name, content);
    m.outputs.emplace_back(name, sha256_hex(content));
  };
  if (!run.data.empty()) put("data.csv", run.data.render());
  const json summary = {{"tool_version", kToolVersion},
                        {"config", ExperimentConfig::to_json(c, false)},
                        {"results", run.results}};
  put("summary.json", summary.dump(2) + "\n");
  for (const auto& [name, content] : run.extra_files) put(name, content);
  detail::write_file(dir / "manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

inline ResultManifest run_experiment(const ExperimentConfig& c, const Request& req,
                                     RunOutput* out = nullptr) {
  RunOutput run = compute(c, req);
  ResultManifest m = emit_outputs(c, req, run);
  if (out != nullptr) *out = std::move(run);
  return m;
}

}  // namespace secperc::experiment
