#include "expgnn/fixtures.hpp"

#include <numeric>

#include "expgnn/datasets.hpp"
#include "expgnn/oracles.hpp"
#include "expgnn/random.hpp"

namespace expgnn {

std::pair<Graph, Graph> two_paths_pair(std::size_t len) {
  return {gen_two_paths(len, false).graph, gen_two_paths(len, true).graph};
}

std::pair<Graph, Graph> diamond_pair() {
  Graph a(8), b(8);
  for (auto [s, d] : {std::pair{0, 1}, {0, 7}, {1, 2}, {3, 5}, {3, 6}, {5, 4}, {6, 4}, {7, 2}}) a.add_edge(s, d);
  for (auto [s, d] : {std::pair{0, 7}, {1, 6}, {2, 6}, {3, 7}, {4, 2}, {4, 3}, {5, 0}, {5, 1}}) b.add_edge(s, d);
  return {a, b};
}

std::vector<WlFixture> wl_fixtures(const WlFixtureOptions& options) {
  std::vector<WlFixture> out;
  auto [d1, d2] = diamond_pair();
  out.push_back({"diamonds", d1, d2, false});

  const std::vector<std::size_t> skips = csl_skips(41);
  for (std::size_t i = 0; i < skips.size(); ++i)
    for (std::size_t j = i + 1; j < skips.size(); ++j)
      out.push_back({"csl41 " + std::to_string(skips[i]) + "/" + std::to_string(skips[j]), gen_csl(41, skips[i]),
                     gen_csl(41, skips[j]), false});

  auto [p1, p2] = two_paths_pair(5);
  out.push_back({"two paths", p1, p2, false});

  Graph triangle = Graph::undirected(3), path = Graph::undirected(3);
  triangle.add_edge(0, 1);
  triangle.add_edge(1, 2);
  triangle.add_edge(2, 0);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  out.push_back({"triangle/path", triangle, path, true});

  for (std::size_t k = 0; k < options.random_isomorphic_pairs; ++k) {
    Rng rng(derive_seed(options.seed, 20, k));
    const std::size_t n = uniform_between(rng, 1, options.max_random_nodes);
    Graph g = gen_uniform(n, 0.3, bernoulli(rng, 0.5), rng);
    for (NodeId v = 0; v < n; ++v) g.set_node_label(v, static_cast<Label>(uniform_index(rng, 2)));
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    out.push_back({"isomorphic " + std::to_string(k), g, permute(g, perm), false});
  }
  return out;
}

std::vector<WlVerdict> check_wl_fixtures(const std::vector<WlFixture>& fixtures) {
  std::vector<WlVerdict> out;
  out.reserve(fixtures.size());
  for (const WlFixture& f : fixtures)
    out.push_back({f.name, f.expect_distinguishable, wl_distinguishable(f.first, f.second),
                   wl_distinguishable(f.first, f.second, 1)});
  return out;
}

}  // namespace expgnn
