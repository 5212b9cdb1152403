#pragma once

// Directed secrecy graphs over a legitimate and an eavesdropper point set.
//
// Path-loss: i -> j iff d_ij <= rho(i), rho(i) the nearest-eavesdropper
// distance. Fading: i -> j iff d_ij^-alpha g_ij > T_i, T_i the largest power
// any eavesdropper receives from i. With gamma > 0 the edge needs a secrecy
// rate of at least gamma against the strongest eavesdropper instead.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "secperc/errors.hpp"
#include "secperc/geometry.hpp"
#include "secperc/model.hpp"

namespace secperc::graph {

using geom::kInf;
using geom::Point2;
using NodeId = std::uint32_t;
using Adjacency = std::vector<std::vector<NodeId>>;

/// Secrecy rate [log2(1 + P d_ij^-a g_ij) - log2(1 + P d_ie^-a g_ie)]^+ in
/// bits/s/Hz. d_ie = +inf means no eavesdropper.
inline double secrecy_rate(double d_ij, double d_ie, double g_ij, double g_ie, double power,
                           double alpha) {
  if (!(d_ij > 0.0) || !(d_ie > 0.0))
    throw ParameterError("secrecy_rate: distances must be positive");
  if (g_ij < 0.0 || g_ie < 0.0) throw ParameterError("secrecy_rate: gains must be non-negative");
  const double legit = power * std::pow(d_ij, -alpha) * g_ij;
  const double eaves = std::isinf(d_ie) ? 0.0 : power * std::pow(d_ie, -alpha) * g_ie;
  const double rate = (std::log1p(legit) - std::log1p(eaves)) / std::numbers::ln2;
  return std::max(rate, 0.0);
}

/// Nearest-eavesdropper distance; +inf without eavesdroppers.
inline double rho(Point2 node, const geom::PPPSample& eaves, const geom::GridIndex& index) {
  return geom::nearest_distance(node, eaves, index);
}

/// max_e d_ie^-alpha * fade_e; 0 without eavesdroppers.
inline double max_eaves_power(Point2 node, std::span<const Point2> eaves,
                              std::span<const double> fades, double alpha) {
  if (eaves.size() != fades.size())
    throw ParameterError("max_eaves_power: one fade per eavesdropper required");
  double best = 0.0;
  for (std::size_t e = 0; e < eaves.size(); ++e) {
    const double d = geom::distance(node, eaves[e]);
    if (d == 0.0) throw ParameterError("eavesdropper coincides with a legitimate node");
    best = std::max(best, std::pow(d, -alpha) * fades[e]);
  }
  return best;
}

/// Path-loss edge predicate given d_ij and rho(i). The tie d_ij = rho(i) is
/// an edge.
inline bool path_loss_edge(double d_ij, double rho_i, const ModelParams& p) {
  if (p.gamma == 0.0) return d_ij <= rho_i;
  if (d_ij == 0.0) return true;
  return secrecy_rate(d_ij, rho_i, 1.0, 1.0, p.power, p.alpha) >= p.gamma;
}

/// Fading edge predicate given d_ij, the pair's fade and T_i. The tie
/// d_ij^-alpha g_ij = T_i is not an edge.
inline bool fading_edge(double d_ij, double g_ij, double t_i, const ModelParams& p) {
  const double legit = d_ij == 0.0 ? kInf : std::pow(d_ij, -p.alpha) * g_ij;
  if (p.gamma == 0.0) return legit > t_i;
  // The rate is monotone in the eavesdropper power, so the minimum over
  // eavesdroppers is attained at the strongest one.
  if (!(legit > t_i)) return false;
  if (std::isinf(legit)) return true;
  const double rate = (std::log1p(p.power * legit) - std::log1p(p.power * t_i)) / std::numbers::ln2;
  return rate >= p.gamma;
}

struct BuildOptions {
  /// Edges must be strictly shorter than this.
  double max_edge_length = kInf;
  /// Source-node processing order; empty means 0..n-1.
  std::span<const NodeId> order{};
};

struct SecrecyGraph {
  std::vector<Point2> nodes;
  std::vector<Point2> eaves;
  /// rho(i) for path-loss, T_i for fading.
  std::vector<double> eaves_summary;
  Adjacency adjacency;
  ModelParams params;
  std::uint64_t fade_seed = 0;
  double max_edge_length = kInf;

  std::size_t size() const noexcept { return nodes.size(); }
  std::size_t edge_count() const noexcept {
    std::size_t n = 0;
    for (const auto& a : adjacency) n += a.size();
    return n;
  }
  bool has_edge(NodeId i, NodeId j) const {
    const auto& a = adjacency.at(i);
    return std::binary_search(a.begin(), a.end(), j);
  }
};

/// Edge predicate for an ordered pair of a built graph, evaluated from its
/// stored summaries and the pair-keyed fade function.
inline bool edge_exists(const SecrecyGraph& g, NodeId i, NodeId j) {
  if (i >= g.size() || j >= g.size()) throw ParameterError("edge_exists: node id out of range");
  if (i == j) return false;
  const double d = geom::distance(g.nodes[i], g.nodes[j]);
  if (!(d < g.max_edge_length)) return false;
  if (!g.params.is_fading()) return path_loss_edge(d, g.eaves_summary[i], g.params);
  const double gij = fade_gain(g.fade_seed, FadeDomain::legit_pair, i, j, g.params.fading);
  return fading_edge(d, gij, g.eaves_summary[i], g.params);
}

namespace detail {

inline double typical_spacing(std::size_t count, double area) {
  if (count == 0 || !(area > 0.0)) return kInf;
  return std::sqrt(area / static_cast<double>(count));
}

// T_i over an eavesdropper grid. Rings stop once even a gain of `cap` from
// the remaining eavesdroppers could not beat the current maximum.
inline double max_power_pruned(Point2 q, NodeId i, const geom::GridIndex& index,
                               const ModelParams& p, std::uint64_t fade_seed) {
  double best = 0.0;
  const double cap = p.effective_gain_cap();
  index.ring_search(
      q,
      [&](std::uint32_t e, Point2 pe) {
        const double d = geom::distance(q, pe);
        if (d == 0.0) throw ParameterError("eavesdropper coincides with a legitimate node");
        const double g = fade_gain(fade_seed, FadeDomain::eaves_pair, i, e, p.fading);
        best = std::max(best, std::pow(d, -p.alpha) * g);
      },
      [&](double bound) { return best > 0.0 && best * std::pow(bound, p.alpha) > cap; });
  return best;
}

}  // namespace detail

/// Builds the secrecy graph of `legit` against `eaves`. The eavesdropper
/// window must cover the legitimate window.
inline SecrecyGraph build_graph(const geom::PPPSample& legit, const geom::PPPSample& eaves,
                                const ModelParams& params, std::uint64_t fade_seed,
                                const BuildOptions& options = {}) {
  params.validate();
  if (!eaves.window.covers(legit.window))
    throw ParameterError("eavesdropper window must cover the legitimate window");
  if (!(options.max_edge_length > 0.0)) throw ParameterError("max edge length must be positive");
  const std::size_t n = legit.size();
  if (!options.order.empty() && options.order.size() != n)
    throw ParameterError("node order must be a permutation of all nodes");

  SecrecyGraph g;
  g.nodes = legit.points;
  g.eaves = eaves.points;
  g.params = params;
  g.fade_seed = fade_seed;
  g.max_edge_length = options.max_edge_length;
  g.eaves_summary.assign(n, 0.0);
  g.adjacency.assign(n, {});

  const double eaves_spacing = detail::typical_spacing(eaves.size(), eaves.window.area());
  const geom::GridIndex eaves_index(eaves, std::isfinite(eaves_spacing) ? eaves_spacing : 1.0);

  // Legit cell: the edge cap if any, else the typical connectivity radius.
  double legit_cell = options.max_edge_length;
  if (!std::isfinite(legit_cell)) legit_cell = std::isfinite(eaves_spacing) ? eaves_spacing : kInf;
  const geom::GridIndex legit_index(std::span<const Point2>(legit.points),
                                    std::isfinite(legit_cell) ? legit_cell : 1.0);

  auto process = [&](NodeId i) {
    const Point2 xi = legit.points[i];
    auto& out = g.adjacency[i];
    if (!params.is_fading()) {
      const double r = eaves_index.nearest(xi).second;
      if (r == 0.0) throw ParameterError("eavesdropper coincides with a legitimate node");
      g.eaves_summary[i] = r;
      legit_index.for_each_candidate(xi, std::min(r, options.max_edge_length),
                                     [&](std::uint32_t j, Point2 xj) {
                                       if (j == i) return;
                                       const double d = geom::distance(xi, xj);
                                       if (d < options.max_edge_length &&
                                           path_loss_edge(d, r, params))
                                         out.push_back(j);
                                     });
    } else {
      const double t = detail::max_power_pruned(xi, i, eaves_index, params, fade_seed);
      g.eaves_summary[i] = t;
      double radius = options.max_edge_length;
      if (t > 0.0) radius = std::min(radius, std::pow(params.effective_gain_cap() / t, 1.0 / params.alpha));
      legit_index.for_each_candidate(xi, radius, [&](std::uint32_t j, Point2 xj) {
        if (j == i) return;
        const double d = geom::distance(xi, xj);
        if (!(d < options.max_edge_length)) return;
        const double gij = fade_gain(fade_seed, FadeDomain::legit_pair, i, j, params.fading);
        if (fading_edge(d, gij, t, params)) out.push_back(j);
      });
    }
    std::sort(out.begin(), out.end());
  };

  if (options.order.empty()) {
    for (NodeId i = 0; i < n; ++i) process(i);
  } else {
    for (NodeId i : options.order) {
      if (i >= n) throw ParameterError("node order contains an out-of-range id");
      process(i);
    }
  }
  return g;
}

enum class ComponentMode { out, in, bidirectional, either };

inline const char* to_string(ComponentMode m) {
  switch (m) {
    case ComponentMode::out: return "out";
    case ComponentMode::in: return "in";
    case ComponentMode::bidirectional: return "bidirectional";
    case ComponentMode::either: return "either";
  }
  return "out";
}

inline Adjacency reverse(const Adjacency& adj) {
  Adjacency rev(adj.size());
  for (NodeId i = 0; i < adj.size(); ++i)
    for (NodeId j : adj[i]) rev[j].push_back(i);
  return rev;
}

inline Adjacency symmetrize(const Adjacency& adj) {
  Adjacency sym = reverse(adj);
  for (NodeId i = 0; i < adj.size(); ++i) {
    sym[i].insert(sym[i].end(), adj[i].begin(), adj[i].end());
    std::sort(sym[i].begin(), sym[i].end());
    sym[i].erase(std::unique(sym[i].begin(), sym[i].end()), sym[i].end());
  }
  return sym;
}

/// Reachable set (including the sources), as a membership mask.
inline std::vector<char> reachable(const Adjacency& adj, std::span<const NodeId> sources) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<NodeId> frontier;
  for (NodeId s : sources) {
    if (!seen[s]) {
      seen[s] = 1;
      frontier.push_back(s);
    }
  }
  while (!frontier.empty()) {
    const NodeId v = frontier.back();
    frontier.pop_back();
    for (NodeId w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        frontier.push_back(w);
      }
    }
  }
  return seen;
}

/// Component of `root` in the given directionality sense, sorted ascending.
/// bidirectional is mutual reachability: {k : root -> k and k -> root}.
inline std::vector<NodeId> component(const Adjacency& adj, NodeId root, ComponentMode mode) {
  if (root >= adj.size()) throw ParameterError("component: unknown root node");
  const NodeId src[] = {root};
  std::vector<char> mask;
  switch (mode) {
    case ComponentMode::out: mask = reachable(adj, src); break;
    case ComponentMode::in: mask = reachable(reverse(adj), src); break;
    case ComponentMode::either: mask = reachable(symmetrize(adj), src); break;
    case ComponentMode::bidirectional: {
      mask = reachable(adj, src);
      const auto back = reachable(reverse(adj), src);
      for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = mask[k] && back[k];
      break;
    }
  }
  std::vector<NodeId> out;
  for (NodeId k = 0; k < mask.size(); ++k)
    if (mask[k]) out.push_back(k);
  return out;
}

inline std::vector<NodeId> component(const SecrecyGraph& g, NodeId root, ComponentMode mode) {
  return component(g.adjacency, root, mode);
}

}  // namespace secperc::graph
