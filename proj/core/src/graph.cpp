#include "expgnn/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "expgnn/errors.hpp"

namespace expgnn {

Graph::Graph(std::size_t n, bool symmetric) : node_labels_(n, 0), symmetric_(symmetric) {}

Graph::Graph(std::size_t n, std::vector<Label> node_labels, bool symmetric)
    : node_labels_(std::move(node_labels)), symmetric_(symmetric) {
  if (node_labels_.size() != n) {
    throw ContractError("graph of " + std::to_string(n) + " nodes given " + std::to_string(node_labels_.size()) +
                        " labels");
  }
}

void Graph::set_node_label(NodeId v, Label label) {
  if (v >= size()) throw ContractError("set_node_label: node " + std::to_string(v) + " out of range");
  node_labels_[v] = label;
}

bool Graph::add_edge(NodeId src, NodeId dst, Label label) {
  if (src >= size() || dst >= size()) {
    throw ContractError("edge " + std::to_string(src) + "->" + std::to_string(dst) + " outside graph of " +
                        std::to_string(size()) + " nodes");
  }
  if (label < 0) throw ContractError("negative edge label");
  const bool inserted = edges_.insert(Edge{src, dst, label}).second;
  if (symmetric_) edges_.insert(Edge{dst, src, label});
  return inserted;
}

bool Graph::has_edge(NodeId src, NodeId dst) const {
  auto it = edges_.lower_bound(Edge{src, dst, 0});
  return it != edges_.end() && it->src == src && it->dst == dst;
}

bool Graph::has_edge(NodeId src, NodeId dst, Label label) const { return edges_.contains(Edge{src, dst, label}); }

std::size_t Graph::undirected_edge_count() const {
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const Edge& e : edges_) pairs.emplace(std::min(e.src, e.dst), std::max(e.src, e.dst));
  return pairs.size();
}

std::size_t Graph::edge_label_count() const {
  Label top = -1;
  for (const Edge& e : edges_) top = std::max(top, e.label);
  return static_cast<std::size_t>(top + 1);
}

std::size_t Graph::node_label_count() const {
  if (node_labels_.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(node_labels_.begin(), node_labels_.end()) + 1);
}

std::vector<std::vector<NodeId>> Graph::out_neighbors() const {
  std::vector<std::vector<NodeId>> out(size());
  for (const Edge& e : edges_)
    if (out[e.src].empty() || out[e.src].back() != e.dst) out[e.src].push_back(e.dst);
  return out;
}

std::vector<std::vector<NodeId>> Graph::in_neighbors() const {
  std::vector<std::vector<NodeId>> in(size());
  for (const Edge& e : edges_) in[e.dst].push_back(e.src);
  for (auto& list : in) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return in;
}

AdjMatrix adjacency(const Graph& g, std::optional<Label> edge_label, bool reversed) {
  AdjMatrix a = AdjMatrix::square(g.size());
  for (const Edge& e : g.edges()) {
    if (edge_label && e.label != *edge_label) continue;
    if (reversed)
      a.set(e.src, e.dst);
    else
      a.set(e.dst, e.src);
  }
  return a;
}

AdjMatrix expand_window(const AdjMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("expand_window needs a square matrix");
  const std::size_t n = a.rows();
  AdjMatrix out = a;
  std::vector<std::uint8_t> acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row_i = a.row(i);
    std::copy(row_i.begin(), row_i.end(), acc.begin());
    for (std::size_t k = 0; k < n; ++k) {
      if (!row_i[k]) continue;
      const auto row_k = a.row(k);
      for (std::size_t j = 0; j < n; ++j) acc[j] |= row_k[j];
    }
    for (std::size_t j = 0; j < n; ++j)
      if (acc[j]) out.set(i, j);
  }
  return out;
}

std::vector<AdjMatrix> window_sequence(const AdjMatrix& a, std::size_t layers) {
  if (layers == 0) throw ContractError("window_sequence needs at least one layer");
  std::vector<AdjMatrix> seq;
  seq.reserve(layers);
  seq.push_back(a);
  while (seq.size() < layers) seq.push_back(expand_window(seq.back()));
  return seq;
}

std::vector<NodeId> inverse_permutation(std::span<const NodeId> perm) {
  const std::size_t n = perm.size();
  std::vector<NodeId> inv(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    if (perm[v] >= n || inv[perm[v]] != n) throw ContractError("permutation is not a bijection");
    inv[perm[v]] = v;
  }
  return inv;
}

Graph permute(const Graph& g, std::span<const NodeId> perm) {
  if (perm.size() != g.size()) {
    throw ContractError("permutation of length " + std::to_string(perm.size()) + " for graph of " +
                        std::to_string(g.size()) + " nodes");
  }
  const auto inv = inverse_permutation(perm);  // validates
  std::vector<Label> labels(g.size());
  for (NodeId v = 0; v < g.size(); ++v) labels[v] = g.node_label(inv[v]);
  Graph out(g.size(), std::move(labels), g.symmetric());
  for (const Edge& e : g.edges()) out.add_edge(perm[e.src], perm[e.dst], e.label);
  return out;
}

void write_graph(std::ostream& out, const Graph& g) {
  out << g.size() << ' ' << g.edge_count() << '\n';
  for (const Edge& e : g.edges()) out << e.src << ' ' << e.dst << ' ' << e.label << '\n';
  for (std::size_t v = 0; v < g.size(); ++v) out << (v ? " " : "") << g.node_label(v);
  out << '\n';
}

namespace {

std::string next_line(std::istream& in, const std::string& source, std::size_t& line_no, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, line_no + 1, std::string("unexpected end of input, expected ") + what);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Graph read_graph(std::istream& in, const std::string& source) {
  std::size_t line_no = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  {
    std::istringstream header(next_line(in, source, line_no, "header 'n m'"));
    std::string extra;
    if (!(header >> n >> m) || (header >> extra)) throw ParseError(source, line_no, "malformed header, expected 'n m'");
  }
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    std::istringstream row(next_line(in, source, line_no, "edge line"));
    long long src = 0;
    long long dst = 0;
    long long label = 0;
    std::string extra;
    if (!(row >> src >> dst >> label) || (row >> extra)) throw ParseError(source, line_no, "malformed edge line");
    if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= n || static_cast<std::size_t>(dst) >= n)
      throw ParseError(source, line_no, "edge endpoint out of range");
    if (label < 0) throw ParseError(source, line_no, "negative edge label");
    edges.push_back(Edge{static_cast<NodeId>(src), static_cast<NodeId>(dst), static_cast<Label>(label)});
  }
  std::vector<Label> labels;
  labels.reserve(n);
  {
    std::istringstream row(next_line(in, source, line_no, "node label line"));
    long long label = 0;
    while (row >> label) labels.push_back(static_cast<Label>(label));
    if (!row.eof() || labels.size() != n)
      throw ParseError(source, line_no, "expected " + std::to_string(n) + " node labels");
  }
  std::set<Edge> unique(edges.begin(), edges.end());
  if (unique.size() != edges.size()) throw ParseError(source, line_no, "duplicate edge");
  const bool mirrored = std::all_of(unique.begin(), unique.end(),
                                    [&](const Edge& e) { return unique.contains(Edge{e.dst, e.src, e.label}); });
  Graph g(n, std::move(labels), mirrored);
  for (const Edge& e : unique) g.add_edge(e.src, e.dst, e.label);
  return g;
}

}  // namespace expgnn
