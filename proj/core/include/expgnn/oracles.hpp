#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "expgnn/graph.hpp"

namespace expgnn {

// Exact labelers for the synthetic tasks. All of them are pure functions.

/// True iff the undirected graph has a cycle. Requires a symmetric graph.
bool has_cycle(const Graph& g);

/// True iff four nodes are pairwise adjacent (edge direction ignored).
bool has_clique4(const Graph& g);

/// True iff a directed path a ~> b exists. path_exists(g, a, a) is true.
bool path_exists(const Graph& g, NodeId a, NodeId b);

/// True iff some node has at least k distinct neighbours (edge direction ignored, self excluded).
bool max_degree_at_least(const Graph& g, std::size_t k);

/// Result of 1-WL colour refinement.
struct WlColoring {
  std::size_t rounds = 0;
  std::vector<int> colors;
  /// histogram[c] = number of nodes with colour c.
  std::vector<std::size_t> histogram;
};

/// 1-WL refinement on a directed labelled graph. A node's signature is
/// (own colour, multiset of (in-neighbour colour, edge label), multiset of
/// (out-neighbour colour, edge label)); colours start from node labels and
/// are renumbered densely in sorted-signature order every round. Runs to a
/// stable partition unless `max_rounds` caps it.
WlColoring wl_refine(const Graph& g, std::optional<std::size_t> max_rounds = std::nullopt);

/// True iff refinement on the disjoint union gives the two graphs different
/// colour histograms.
bool wl_distinguishable(const Graph& g1, const Graph& g2, std::optional<std::size_t> max_rounds = std::nullopt);

/// Disjoint union; g2's nodes follow g1's.
Graph disjoint_union(const Graph& g1, const Graph& g2);

}  // namespace expgnn
