#include "expgnn/oracles.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

#include "expgnn/errors.hpp"

namespace expgnn {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

BoolMatrix undirected_adjacency(const Graph& g) {
  BoolMatrix adj = BoolMatrix::square(g.size());
  for (const Edge& e : g.edges()) {
    if (e.src == e.dst) continue;
    adj.set(e.src, e.dst);
    adj.set(e.dst, e.src);
  }
  return adj;
}

}  // namespace

bool has_cycle(const Graph& g) {
  if (!g.symmetric()) throw ContractError("has_cycle expects a symmetric graph");
  DisjointSets sets(g.size());
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Edge& e : g.edges()) {
    if (e.src == e.dst) return true;
    if (e.src > e.dst) continue;
    if (!seen.emplace(e.src, e.dst).second) continue;  // another label on the same pair
    if (!sets.unite(e.src, e.dst)) return true;
  }
  return false;
}

bool has_clique4(const Graph& g) {
  const std::size_t n = g.size();
  const BoolMatrix adj = undirected_adjacency(g);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!adj.get(a, b)) continue;
      for (std::size_t c = b + 1; c < n; ++c) {
        if (!adj.get(a, c) || !adj.get(b, c)) continue;
        for (std::size_t d = c + 1; d < n; ++d)
          if (adj.get(a, d) && adj.get(b, d) && adj.get(c, d)) return true;
      }
    }
  return false;
}

bool path_exists(const Graph& g, NodeId a, NodeId b) {
  if (a >= g.size() || b >= g.size()) throw ContractError("path_exists: node out of range");
  if (a == b) return true;
  const auto out = g.out_neighbors();
  std::vector<bool> seen(g.size(), false);
  std::queue<NodeId> frontier;
  frontier.push(a);
  seen[a] = true;
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop();
    for (NodeId w : out[v]) {
      if (w == b) return true;
      if (!seen[w]) {
        seen[w] = true;
        frontier.push(w);
      }
    }
  }
  return false;
}

bool max_degree_at_least(const Graph& g, std::size_t k) {
  const BoolMatrix adj = undirected_adjacency(g);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto row = adj.row(v);
    if (static_cast<std::size_t>(std::count(row.begin(), row.end(), std::uint8_t{1})) >= k) return true;
  }
  return false;
}

namespace {

// Dense ids for `keys` in sorted order.
template <typename Key>
std::vector<int> canonical_ids(const std::vector<Key>& keys, std::size_t& distinct) {
  std::vector<Key> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  distinct = sorted.size();
  std::vector<int> ids(keys.size());
  for (std::size_t v = 0; v < keys.size(); ++v)
    ids[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[v]) - sorted.begin());
  return ids;
}

}  // namespace

WlColoring wl_refine(const Graph& g, std::optional<std::size_t> max_rounds) {
  const std::size_t n = g.size();
  WlColoring result;
  std::size_t distinct = 0;
  result.colors = canonical_ids(g.node_labels(), distinct);

  std::vector<std::vector<std::pair<NodeId, Label>>> in(n);
  std::vector<std::vector<std::pair<NodeId, Label>>> out(n);
  for (const Edge& e : g.edges()) {
    in[e.dst].emplace_back(e.src, e.label);
    out[e.src].emplace_back(e.dst, e.label);
  }

  std::vector<std::vector<long long>> signatures(n);
  while (!max_rounds || result.rounds < *max_rounds) {
    for (std::size_t v = 0; v < n; ++v) {
      auto& sig = signatures[v];
      sig.clear();
      sig.push_back(result.colors[v]);
      for (const auto* side : {&in[v], &out[v]}) {
        std::vector<std::pair<int, Label>> items;
        items.reserve(side->size());
        for (const auto& [w, label] : *side) items.emplace_back(result.colors[w], label);
        std::sort(items.begin(), items.end());
        sig.push_back(static_cast<long long>(items.size()));
        for (const auto& [c, label] : items) {
          sig.push_back(c);
          sig.push_back(label);
        }
      }
    }
    std::size_t refined = 0;
    auto next = canonical_ids(signatures, refined);
    ++result.rounds;
    const bool stable = refined == distinct;
    result.colors = std::move(next);
    distinct = refined;
    if (stable) break;
  }

  result.histogram.assign(distinct, 0);
  for (int c : result.colors) ++result.histogram[static_cast<std::size_t>(c)];
  return result;
}

Graph disjoint_union(const Graph& g1, const Graph& g2) {
  std::vector<Label> labels = g1.node_labels();
  labels.insert(labels.end(), g2.node_labels().begin(), g2.node_labels().end());
  const std::size_t n = labels.size();
  Graph u(n, std::move(labels), g1.symmetric() && g2.symmetric());
  for (const Edge& e : g1.edges()) u.add_edge(e.src, e.dst, e.label);
  const std::size_t offset = g1.size();
  for (const Edge& e : g2.edges()) u.add_edge(e.src + offset, e.dst + offset, e.label);
  return u;
}

bool wl_distinguishable(const Graph& g1, const Graph& g2, std::optional<std::size_t> max_rounds) {
  if (g1.size() != g2.size()) return true;
  const WlColoring joint = wl_refine(disjoint_union(g1, g2), max_rounds);
  std::vector<int> left(joint.colors.begin(), joint.colors.begin() + static_cast<std::ptrdiff_t>(g1.size()));
  std::vector<int> right(joint.colors.begin() + static_cast<std::ptrdiff_t>(g1.size()), joint.colors.end());
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  return left != right;
}

}  // namespace expgnn
