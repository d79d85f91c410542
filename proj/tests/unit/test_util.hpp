#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "expgnn/graph.hpp"
#include "expgnn/random.hpp"
#include "expgnn/tensor.hpp"

namespace testutil {

using namespace expgnn;

inline Graph random_graph(std::size_t n, double p, bool symmetric, Rng& rng, int node_labels = 1, int edge_labels = 1) {
  Graph g(n, symmetric);
  for (NodeId v = 0; v < n; ++v) g.set_node_label(v, static_cast<Label>(uniform_index(rng, node_labels)));
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = symmetric ? i + 1 : 0; j < n; ++j)
      if (i != j && uniform01(rng) < p) g.add_edge(i, j, static_cast<Label>(uniform_index(rng, edge_labels)));
  return g;
}

inline Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::matrix(r, c);
  for (double& x : t.values()) x = lo + (hi - lo) * uniform01(rng);
  return t;
}

// Shortest directed path lengths from src by plain BFS; -1 when unreachable.
inline std::vector<int> bfs_distances(const Graph& g, NodeId src) {
  std::vector<std::vector<NodeId>> out(g.size());
  for (const Edge& e : g.edges()) out[e.src].push_back(e.dst);
  std::vector<int> dist(g.size(), -1);
  std::deque<NodeId> queue{src};
  dist[src] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : out[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

// Central differences of a scalar function of one tensor.
inline Tensor numeric_gradient(const std::function<double(const Tensor&)>& f, Tensor x, double h = 1e-6) {
  Tensor g = zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

}  // namespace testutil
