#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "expgnn/datasets.hpp"
#include "expgnn/errors.hpp"
#include "expgnn/fixtures.hpp"
#include "expgnn/oracles.hpp"
#include "test_util.hpp"

using namespace expgnn;

namespace {

// A graph with m undirected edges and c components is acyclic iff m = n - c.
bool cycle_by_union_find(const Graph& g) {
  std::vector<std::size_t> parent(g.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : g.edges()) {
    if (e.src >= e.dst) continue;
    const auto a = find(e.src), b = find(e.dst);
    if (a == b) return true;
    parent[a] = b;
  }
  return false;
}

bool clique4_by_subsets(const Graph& g) {
  const std::size_t n = g.size();
  const auto adj = [&](NodeId a, NodeId b) { return g.has_edge(a, b) || g.has_edge(b, a); };
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      for (NodeId c = b + 1; c < n; ++c)
        for (NodeId d = c + 1; d < n; ++d)
          if (adj(a, b) && adj(a, c) && adj(a, d) && adj(b, c) && adj(b, d) && adj(c, d)) return true;
  return false;
}

bool isomorphic_brute_force(const Graph& a, const Graph& b) {
  if (a.size() != b.size() || a.edge_count() != b.edge_count()) return false;
  std::vector<NodeId> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    if (permute(a, perm).edges() == b.edges() && permute(a, perm).node_labels() == b.node_labels()) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace

TEST(Oracles, HasCycleAgreesWithUnionFind) {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const Graph g = testutil::random_graph(uniform_between(rng, 1, 14), 0.15, true, rng);
    EXPECT_EQ(has_cycle(g), cycle_by_union_find(g));
  }
}

TEST(Oracles, HasCycleNeedsSymmetricGraph) { EXPECT_THROW(has_cycle(Graph(3)), ContractError); }

TEST(Oracles, SmallCycleCases) {
  EXPECT_FALSE(has_cycle(gen_line_or_cycle(5, false).graph));
  EXPECT_TRUE(has_cycle(gen_line_or_cycle(3, true).graph));
  EXPECT_FALSE(has_cycle(Graph::undirected(0)));
}

TEST(Oracles, Clique4AgreesWithSubsetScan) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Graph g = testutil::random_graph(uniform_between(rng, 1, 12), uniform01(rng) * 0.7, trial % 2, rng);
    EXPECT_EQ(has_clique4(g), clique4_by_subsets(g)) << trial;
  }
}

TEST(Oracles, Clique4Cases) {
  Graph k4 = Graph::undirected(4);
  for (NodeId a = 0; a < 4; ++a)
    for (NodeId b = a + 1; b < 4; ++b) k4.add_edge(a, b);
  EXPECT_TRUE(has_clique4(k4));
  Graph triangle = Graph::undirected(3);
  triangle.add_edge(0, 1);
  triangle.add_edge(1, 2);
  triangle.add_edge(0, 2);
  EXPECT_FALSE(has_clique4(triangle));
}

TEST(Oracles, PathExistsAgreesWithBfs) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = uniform_between(rng, 1, 15);
    const Graph g = testutil::random_graph(n, 0.1, false, rng);
    for (NodeId a = 0; a < n; ++a) {
      const auto dist = testutil::bfs_distances(g, a);
      for (NodeId b = 0; b < n; ++b) EXPECT_EQ(path_exists(g, a, b), dist[b] >= 0);
    }
  }
}

TEST(Oracles, PathIsDirected) {
  const Graph g = gen_two_paths(3, true).graph;
  EXPECT_TRUE(path_exists(g, 0, 2));
  EXPECT_FALSE(path_exists(g, 2, 0));
}

TEST(Oracles, MaxDegree) {
  Graph star = Graph::undirected(8);
  for (NodeId v = 1; v < 8; ++v) star.add_edge(0, v);
  EXPECT_TRUE(max_degree_at_least(star, 7));
  EXPECT_FALSE(max_degree_at_least(star, 8));
  Graph loops(3);
  loops.add_edge(0, 0);
  loops.add_edge(0, 1);
  loops.add_edge(2, 0);
  EXPECT_TRUE(max_degree_at_least(loops, 2));
  EXPECT_FALSE(max_degree_at_least(loops, 3));
}

TEST(Wl, IsomorphicPairsAreIndistinguishable) {
  Rng rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = uniform_between(rng, 1, 7);
    const Graph a = testutil::random_graph(n, 0.35, trial % 2, rng, 2);
    const Graph b = testutil::random_graph(n, 0.35, trial % 2, rng, 2);
    if (isomorphic_brute_force(a, b)) EXPECT_FALSE(wl_distinguishable(a, b));
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_FALSE(wl_distinguishable(a, permute(a, perm)));
  }
}

TEST(Wl, DistinguishableImpliesNonIsomorphic) {
  Rng rng(6);
  int distinguished = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const Graph a = testutil::random_graph(6, 0.3, false, rng);
    const Graph b = testutil::random_graph(6, 0.3, false, rng);
    if (wl_distinguishable(a, b)) {
      ++distinguished;
      EXPECT_FALSE(isomorphic_brute_force(a, b));
    }
  }
  EXPECT_GT(distinguished, 0);
}

TEST(Wl, TriangleVersusPath) {
  Graph triangle = Graph::undirected(3), path = Graph::undirected(3);
  triangle.add_edge(0, 1);
  triangle.add_edge(1, 2);
  triangle.add_edge(2, 0);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  EXPECT_TRUE(wl_distinguishable(triangle, path));
}

TEST(Wl, LabelsAndSizesMatter) {
  EXPECT_TRUE(wl_distinguishable(Graph(2), Graph(3)));
  EXPECT_TRUE(wl_distinguishable(Graph(2, {0, 0}), Graph(2, {0, 1})));
}

TEST(Wl, EdgeLabelsMatter) {
  Graph a(2), b(2);
  a.add_edge(0, 1, 0);
  b.add_edge(0, 1, 1);
  EXPECT_TRUE(wl_distinguishable(a, b));
}

TEST(Wl, CslPairsIndistinguishable) {
  EXPECT_FALSE(wl_distinguishable(gen_csl(41, 2), gen_csl(41, 3)));
  EXPECT_FALSE(wl_distinguishable(gen_csl(41, 9), gen_csl(41, 16)));
}

TEST(Wl, DiamondsIndistinguishable) {
  const auto [a, b] = diamond_pair();
  EXPECT_FALSE(wl_distinguishable(a, b));
  EXPECT_FALSE(isomorphic_brute_force(a, b));
}

// The two-paths pair agrees on every immediate neighbourhood, so one round
// cannot separate it; refinement to a fixed point does, since only the
// connected graph has a node both two steps after a and two before b.
TEST(Wl, TwoPathsSeparatedOnlyAfterSeveralRounds) {
  const auto [a, b] = two_paths_pair(5);
  EXPECT_FALSE(wl_distinguishable(a, b, 1));
  EXPECT_TRUE(wl_distinguishable(a, b));
}

TEST(Wl, RoundsStopAtStablePartition) {
  const WlColoring c = wl_refine(gen_csl(41, 2));
  EXPECT_EQ(c.histogram.size(), 1u);
  EXPECT_EQ(c.histogram[0], 41u);
  const WlColoring line = wl_refine(gen_line_or_cycle(5, false).graph);
  EXPECT_EQ(line.histogram.size(), 3u);
}
