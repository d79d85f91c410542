#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "expgnn/tensor.hpp"

namespace expgnn {

using NodeId = std::size_t;
using Label = int;

struct Edge {
  NodeId src;
  NodeId dst;
  Label label;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed graph with labelled nodes and labelled edges. Several labels on
/// the same ordered pair are allowed, each as its own edge. A symmetric
/// graph mirrors every edge it is given.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n, bool symmetric = false);
  Graph(std::size_t n, std::vector<Label> node_labels, bool symmetric = false);

  static Graph undirected(std::size_t n) { return Graph(n, true); }

  std::size_t size() const noexcept { return node_labels_.size(); }
  bool symmetric() const noexcept { return symmetric_; }

  const std::vector<Label>& node_labels() const noexcept { return node_labels_; }
  Label node_label(NodeId v) const { return node_labels_.at(v); }
  void set_node_label(NodeId v, Label label);

  /// Directed edges, sorted. In a symmetric graph both directions appear.
  const std::set<Edge>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  /// Number of distinct unordered node pairs joined by an edge.
  std::size_t undirected_edge_count() const;

  /// Adds src -> dst (and dst -> src when symmetric). Duplicates are ignored.
  /// Returns true when the edge was new.
  bool add_edge(NodeId src, NodeId dst, Label label = 0);
  bool has_edge(NodeId src, NodeId dst) const;
  bool has_edge(NodeId src, NodeId dst, Label label) const;

  /// 1 + largest edge label, or 0 without edges.
  std::size_t edge_label_count() const;
  /// 1 + largest node label, or 0 for the empty graph.
  std::size_t node_label_count() const;

  /// Out-neighbours / in-neighbours of every node, label-agnostic, sorted and unique.
  std::vector<std::vector<NodeId>> out_neighbors() const;
  std::vector<std::vector<NodeId>> in_neighbors() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<Label> node_labels_;
  std::set<Edge> edges_;
  bool symmetric_ = false;
};

/// Adjacency matrices use the attention orientation: row i lists the nodes
/// i can attend to, so bit (i, j) is set iff there is an edge j -> i.
using AdjMatrix = BoolMatrix;

/// Bit (i, j) = edge j -> i, restricted to `edge_label` if given.
/// `reversed` transposes, giving bit (i, j) = edge i -> j.
AdjMatrix adjacency(const Graph& g, std::optional<Label> edge_label = std::nullopt, bool reversed = false);

/// One doubling step of the attention window on the boolean semiring:
/// result(i, j) = a(i, j) or exists k with a(i, k) and a(k, j).
AdjMatrix expand_window(const AdjMatrix& a);

/// Element k covers directed paths j ~> i of length 1..2^k.
std::vector<AdjMatrix> window_sequence(const AdjMatrix& a, std::size_t layers);

/// Relabels node v as perm[v]. Throws ContractError unless perm is a bijection.
Graph permute(const Graph& g, std::span<const NodeId> perm);

std::vector<NodeId> inverse_permutation(std::span<const NodeId> perm);

/// Text form:
///   n m
///   src dst edge_label      (m lines, directed edges)
///   l_0 l_1 ... l_{n-1}     (node labels)
/// A graph read back is flagged symmetric iff every edge has its mirror.
void write_graph(std::ostream& out, const Graph& g);
Graph read_graph(std::istream& in, const std::string& source = "<stream>");

}  // namespace expgnn
