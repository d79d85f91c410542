#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "expgnn/graph.hpp"

namespace expgnn {

/// The two-paths pair as drawn: first without, then with a path from a to b.
std::pair<Graph, Graph> two_paths_pair(std::size_t len = 5);

/// The two "diamond" graphs on 8 nodes: two diamonds versus one 8-cycle
/// with the same local shape.
std::pair<Graph, Graph> diamond_pair();

/// A pair of graphs with the expected 1-WL verdict.
struct WlFixture {
  std::string name;
  Graph first;
  Graph second;
  bool expect_distinguishable = false;
};

struct WlFixtureOptions {
  std::uint64_t seed = 0;
  std::size_t random_isomorphic_pairs = 100;
  std::size_t max_random_nodes = 8;
};

/// Diamonds, all CSL(41, .) pairs, the two-paths pair, random isomorphic
/// pairs and a triangle versus path control.
std::vector<WlFixture> wl_fixtures(const WlFixtureOptions& options = {});

struct WlVerdict {
  std::string name;
  bool expected = false;
  bool distinguishable = false;
  /// Verdict after a single refinement round.
  bool distinguishable_one_round = false;
  bool ok() const { return expected == distinguishable; }
};

std::vector<WlVerdict> check_wl_fixtures(const std::vector<WlFixture>& fixtures);

}  // namespace expgnn
