// Samples one path-loss secrecy graph on [-10, 10]^2 and prints degree and
// component statistics.

#include <cstdio>

#include "secperc/secperc.hpp"

int main() {
  using namespace secperc;
  const double lambda = 4.0, lambda_e = 1.0, half = 10.0;
  const rng::Stream s(2024);

  const auto window = geom::Window::square(half);
  const double pad = geom::pad_width(lambda_e, 1e-4, lambda * window.area());
  const auto legit = geom::sample_ppp(lambda, window, s.split(1));
  const auto eaves = geom::sample_ppp(lambda_e, window.padded(pad), s.split(2));
  const auto g = graph::build_graph(legit, eaves, ModelParams{}, 0);

  std::printf("nodes %zu  eavesdroppers %zu  edges %zu  mean out-degree %.3f\n", g.size(),
              g.eaves.size(), g.edge_count(),
              g.size() ? static_cast<double>(g.edge_count()) / static_cast<double>(g.size()) : 0.0);
  if (g.size() == 0) return 0;
  for (auto mode : {graph::ComponentMode::out, graph::ComponentMode::in,
                    graph::ComponentMode::bidirectional, graph::ComponentMode::either}) {
    const auto c = graph::component(g, 0, mode);
    std::printf("component of node 0 (%s): %zu nodes\n", graph::to_string(mode), c.size());
  }
}
