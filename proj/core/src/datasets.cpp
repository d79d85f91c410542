#include "expgnn/datasets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "expgnn/errors.hpp"
#include "expgnn/oracles.hpp"

namespace expgnn {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 8> kFamilyNames{{
    {Family::uniform, "uniform"},
    {Family::tree, "tree"},
    {Family::tree_plus_edge, "tree_plus_edge"},
    {Family::line, "line"},
    {Family::cycle, "cycle"},
    {Family::two_paths, "two_paths"},
    {Family::csl, "csl"},
    {Family::tud, "tud"},
}};

constexpr std::array<std::pair<Labeler, std::string_view>, 6> kLabelerNames{{
    {Labeler::cycle, "cycle"},
    {Labeler::clique4, "clique4"},
    {Labeler::path, "path"},
    {Labeler::degree7, "degree7"},
    {Labeler::csl, "csl"},
    {Labeler::always_true, "always_true"},
}};

std::optional<std::pair<NodeId, NodeId>> find_endpoints(const Graph& g) {
  std::optional<NodeId> a;
  std::optional<NodeId> b;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (g.node_label(v) == kSourceNode) a = v;
    if (g.node_label(v) == kTargetNode) b = v;
  }
  if (!a || !b) return std::nullopt;
  return std::make_pair(*a, *b);
}

int csl_class(const Graph& g) {
  const std::size_t n = g.size();
  const auto skips = csl_skips(n);
  const auto neighbors = g.out_neighbors();
  for (NodeId w : neighbors.at(0)) {
    const std::size_t d = std::min(w, n - w);
    if (d < 2) continue;
    const auto it = std::find(skips.begin(), skips.end(), d);
    if (it != skips.end()) return static_cast<int>(it - skips.begin());
  }
  throw ContractError("graph is not a circulant skip-link graph of a known class");
}

// Implied labeler and allowed size range of the non-uniform families.
Labeler implied_labeler(Family family) {
  switch (family) {
    case Family::tree:
    case Family::tree_plus_edge:
    case Family::line:
    case Family::cycle:
      return Labeler::cycle;
    case Family::two_paths:
      return Labeler::path;
    case Family::csl:
      return Labeler::csl;
    default:
      return Labeler::cycle;
  }
}

}  // namespace

std::string_view to_string(Family family) {
  for (const auto& [f, name] : kFamilyNames)
    if (f == family) return name;
  return "?";
}

std::string_view to_string(Labeler labeler) {
  for (const auto& [l, name] : kLabelerNames)
    if (l == labeler) return name;
  return "?";
}

std::optional<Family> parse_family(std::string_view name) {
  for (const auto& [f, n] : kFamilyNames)
    if (n == name) return f;
  return std::nullopt;
}

std::optional<Labeler> parse_labeler(std::string_view name) {
  for (const auto& [l, n] : kLabelerNames)
    if (n == name) return l;
  return std::nullopt;
}

void DatasetSpec::validate() const {
  const auto fail = [](const std::string& msg) { throw ContractError("dataset spec: " + msg); };
  if (nodes.min > nodes.max) fail("node range is empty");
  if (edge_prob.has_value() != (family == Family::uniform)) fail("edge_prob is set iff family is uniform");
  if (edge_prob && !(*edge_prob > 0.0 && *edge_prob < 1.0)) fail("edge_prob must lie in (0, 1)");
  switch (family) {
    case Family::uniform:
      if (labeler == Labeler::csl) fail("csl labeler needs the csl family");
      if (nodes.min < (labeler == Labeler::path ? 2u : 1u)) fail("too few nodes");
      break;
    case Family::tree:
      if (nodes.min < 1) fail("trees need a node");
      break;
    case Family::tree_plus_edge:
      if (nodes.min < 3) fail("an extra edge needs at least 3 nodes");
      break;
    case Family::line:
    case Family::cycle:
      if (nodes.min < 3 || nodes.max > 64) fail("line/cycle length must lie in [3, 64]");
      break;
    case Family::two_paths:
      if (nodes.min < 2 || nodes.max > 32) fail("two-paths length must lie in [2, 32]");
      break;
    case Family::csl:
      if (nodes.min != nodes.max) fail("csl needs a fixed node count");
      if (count == 0 || count > csl_skips(nodes.min).size()) fail("csl count exceeds the number of skip classes");
      break;
    case Family::tud:
      if (source.empty()) fail("tud family needs a source directory");
      return;
  }
  if (family != Family::uniform && labeler != implied_labeler(family))
    fail(std::string("family ") + std::string(to_string(family)) + " is labelled by " +
         std::string(to_string(implied_labeler(family))));
}

bool labeler_is_symmetric(Labeler labeler) { return labeler != Labeler::path; }

std::size_t class_count(Labeler labeler) { return labeler == Labeler::csl ? std::size(kCslSkips) : 2; }

int apply_labeler(Labeler labeler, const Graph& g) {
  switch (labeler) {
    case Labeler::cycle:
      return has_cycle(g) ? 1 : 0;
    case Labeler::clique4:
      return has_clique4(g) ? 1 : 0;
    case Labeler::path: {
      const auto ends = find_endpoints(g);
      if (!ends) throw ContractError("path labeler needs nodes labelled a and b");
      return path_exists(g, ends->first, ends->second) ? 1 : 0;
    }
    case Labeler::degree7:
      return max_degree_at_least(g, 7) ? 1 : 0;
    case Labeler::csl:
      return csl_class(g);
    case Labeler::always_true:
      return 1;
  }
  return 0;
}

Graph gen_uniform(std::size_t n, double p, bool symmetric, Rng& rng) {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("gen_uniform: p must lie in (0, 1)");
  Graph g(n, symmetric);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = symmetric ? i + 1 : 0; j < n; ++j) {
      if (i == j) continue;
      if (uniform01(rng) < p) g.add_edge(i, j);
    }
  }
  return g;
}

LabeledGraph gen_tree(std::size_t n, bool extra_edge, Rng& rng) {
  if (n == 0) throw ContractError("gen_tree: empty tree");
  if (extra_edge && n < 3) throw ContractError("gen_tree: an extra edge needs at least 3 nodes");
  Graph g = Graph::undirected(n);
  for (NodeId v = 1; v < n; ++v) g.add_edge(uniform_index(rng, v), v);
  if (extra_edge) {
    std::vector<std::pair<NodeId, NodeId>> free;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (!g.has_edge(i, j)) free.emplace_back(i, j);
    const auto [i, j] = free[uniform_index(rng, free.size())];
    g.add_edge(i, j);
  }
  return {std::move(g), extra_edge ? 1 : 0};
}

LabeledGraph gen_line_or_cycle(std::size_t len, bool cycle) {
  if (len < 3 || len > 64) throw ContractError("gen_line_or_cycle: length must lie in [3, 64]");
  Graph g = Graph::undirected(len);
  for (NodeId v = 0; v + 1 < len; ++v) g.add_edge(v, v + 1);
  if (cycle) g.add_edge(len - 1, 0);
  return {std::move(g), cycle ? 1 : 0};
}

LabeledGraph gen_two_paths(std::size_t len, bool connected) {
  if (len < 2 || len > 32) throw ContractError("gen_two_paths: length must lie in [2, 32]");
  Graph g(2 * len);
  for (NodeId v = 0; v + 1 < len; ++v) {
    g.add_edge(v, v + 1);
    g.add_edge(len + v, len + v + 1);
  }
  g.set_node_label(0, kSourceNode);
  g.set_node_label(connected ? len - 1 : 2 * len - 1, kTargetNode);
  return {std::move(g), connected ? 1 : 0};
}

Graph gen_csl(std::size_t n, std::size_t skip) {
  if (skip < 2 || skip + 2 > n) throw ContractError("gen_csl: skip must lie in [2, n - 2]");
  Graph g = Graph::undirected(n);
  for (NodeId v = 0; v < n; ++v) {
    g.add_edge(v, (v + 1) % n);
    g.add_edge(v, (v + skip) % n);
  }
  return g;
}

std::vector<std::size_t> csl_skips(std::size_t n) {
  if (n == 41) return {std::begin(kCslSkips), std::end(kCslSkips)};
  std::vector<std::size_t> skips;
  for (std::size_t r = 2; 2 * r < n; ++r) skips.push_back(r);
  return skips;
}

LabeledGraph gen_path_dataset_graph(std::size_t n, double p, Rng& rng) {
  if (n < 2) throw ContractError("gen_path_dataset_graph: needs at least 2 nodes");
  const NodeId a = uniform_index(rng, n);
  NodeId b = uniform_index(rng, n - 1);
  if (b >= a) ++b;
  Graph g = gen_uniform(n, p, false, rng);
  g.set_node_label(a, kSourceNode);
  g.set_node_label(b, kTargetNode);
  const int cls = path_exists(g, a, b) ? 1 : 0;
  return {std::move(g), cls};
}

LabeledGraph sample(const DatasetSpec& spec, std::uint64_t index) {
  Rng rng(spec.seed ^ index);
  const std::size_t size = uniform_between(rng, spec.nodes.min, spec.nodes.max);
  switch (spec.family) {
    case Family::uniform: {
      if (!spec.edge_prob) throw ContractError("uniform family needs an edge probability");
      if (spec.labeler == Labeler::path) return gen_path_dataset_graph(size, *spec.edge_prob, rng);
      Graph g = gen_uniform(size, *spec.edge_prob, labeler_is_symmetric(spec.labeler), rng);
      const int cls = apply_labeler(spec.labeler, g);
      return {std::move(g), cls};
    }
    case Family::tree:
      return gen_tree(size, false, rng);
    case Family::tree_plus_edge:
      return gen_tree(size, true, rng);
    case Family::line:
      return gen_line_or_cycle(size, false);
    case Family::cycle:
      return gen_line_or_cycle(size, true);
    case Family::two_paths: {
      // Pairs (disconnected, connected) cycling through the lengths.
      const std::size_t span = spec.nodes.max - spec.nodes.min + 1;
      return gen_two_paths(spec.nodes.min + static_cast<std::size_t>((index / 2) % span), index % 2 == 1);
    }
    case Family::csl: {
      const auto skips = csl_skips(size);
      const std::size_t k = static_cast<std::size_t>(index % std::min(spec.count, skips.size()));
      return {gen_csl(size, skips[k]), static_cast<int>(k)};
    }
    case Family::tud:
      throw ContractError("tud corpora are loaded, not sampled");
  }
  throw ContractError("unknown dataset family");
}

std::vector<LabeledGraph> generate(const DatasetSpec& spec) {
  spec.validate();
  if (spec.family == Family::tud) return load_tud_corpus(spec.source);
  std::vector<LabeledGraph> out;
  out.reserve(spec.count);
  for (std::uint64_t k = 0; k < spec.count; ++k) out.push_back(sample(spec, k));
  return out;
}

double positive_rate(std::size_t n, Labeler labeler, double p, std::size_t samples, std::uint64_t seed) {
  std::size_t positives = 0;
  for (std::uint64_t k = 0; k < samples; ++k) {
    Rng rng(seed ^ k);
    if (labeler == Labeler::path) {
      positives += gen_path_dataset_graph(n, p, rng).class_id == 1;
    } else {
      positives += apply_labeler(labeler, gen_uniform(n, p, labeler_is_symmetric(labeler), rng)) == 1;
    }
  }
  return samples ? static_cast<double>(positives) / static_cast<double>(samples) : 0.0;
}

CalibrationResult calibrate_p(const PositiveSampler& positive, const CalibrationOptions& options) {
  if (options.samples == 0) throw ContractError("calibrate_p: needs samples");
  const auto estimate = [&](double p) {
    std::size_t hits = 0;
    for (std::uint64_t k = 0; k < options.samples; ++k) {
      Rng rng(options.seed ^ k);
      hits += positive(p, rng) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(options.samples);
  };

  constexpr double kLow = 1e-4;
  constexpr double kHigh = 1.0 - 1e-4;
  const double rate_low = estimate(kLow);
  const double rate_high = estimate(kHigh);
  if (rate_low >= 0.5 || rate_high <= 0.5) {
    throw CalibrationError("positive rate does not bracket 1/2: " + std::to_string(rate_low) + " at p=" +
                           std::to_string(kLow) + ", " + std::to_string(rate_high) + " at p=" + std::to_string(kHigh));
  }

  std::map<double, double> probes{{kLow, rate_low}, {kHigh, rate_high}};
  double lo = kLow;
  double hi = kHigh;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rate = estimate(mid);
    probes[mid] = rate;
    (rate < 0.5 ? lo : hi) = mid;
  }

  double previous = -1.0;
  for (const auto& [p, rate] : probes) {
    if (rate < previous) {
      throw CalibrationError("positive rate decreases in p near p=" + std::to_string(p));
    }
    previous = rate;
  }

  CalibrationResult best{kLow, rate_low};
  for (const auto& [p, rate] : probes)
    if (std::abs(rate - 0.5) < std::abs(best.positive_rate - 0.5)) best = {p, rate};
  if (best.positive_rate < 0.45 || best.positive_rate > 0.55) {
    throw CalibrationError("no probe reached a positive rate in [0.45, 0.55]; closest " +
                           std::to_string(best.positive_rate) + " at p=" + std::to_string(best.p));
  }
  return best;
}

CalibrationResult calibrate_p(std::size_t n, Labeler labeler, const CalibrationOptions& options) {
  if (labeler == Labeler::csl) throw ContractError("the csl labeler has no edge probability");
  return calibrate_p(
      [n, labeler](double p, Rng& rng) {
        if (labeler == Labeler::path) return gen_path_dataset_graph(n, p, rng).class_id == 1;
        return apply_labeler(labeler, gen_uniform(n, p, labeler_is_symmetric(labeler), rng)) == 1;
      },
      options);
}

// ---------------------------------------------------------------------------
// TU Dortmund corpora

namespace {

struct NumberedLine {
  std::size_t line_no;
  std::string text;
};

std::vector<NumberedLine> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<NumberedLine> lines;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back({line_no, text});
  }
  return lines;
}

std::vector<long long> parse_ints(const NumberedLine& line, const std::string& file, std::size_t expected) {
  std::string text = line.text;
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::vector<long long> values;
  long long v = 0;
  while (in >> v) values.push_back(v);
  if (!in.eof() || values.size() != expected) {
    throw ParseError(file, line.line_no, "expected " + std::to_string(expected) + " integer(s)");
  }
  return values;
}

// Dense ids, in sorted order of the raw values.
std::vector<int> densify(const std::vector<long long>& raw) {
  std::vector<long long> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), raw[i]) - sorted.begin());
  return out;
}

std::string detect_prefix(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> candidates;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    constexpr std::string_view suffix = "_A.txt";
    if (name.size() > suffix.size() && name.ends_with(suffix))
      candidates.push_back(name.substr(0, name.size() - suffix.size()));
  }
  if (candidates.size() != 1)
    throw IoError("expected exactly one *_A.txt edge file in " + dir.string() + ", found " +
                  std::to_string(candidates.size()));
  return candidates.front();
}

}  // namespace

std::vector<LabeledGraph> load_tud_corpus(const std::filesystem::path& dir, std::string name) {
  if (name.empty()) name = detect_prefix(dir);
  const auto file = [&](const char* suffix) { return dir / (name + suffix); };

  const auto indicator_path = file("_graph_indicator.txt");
  const auto graph_labels_path = file("_graph_labels.txt");
  const auto edges_path = file("_A.txt");
  const auto node_labels_path = file("_node_labels.txt");
  const auto edge_labels_path = file("_edge_labels.txt");

  const auto indicator_lines = read_lines(indicator_path);
  const auto graph_label_lines = read_lines(graph_labels_path);
  const auto edge_lines = read_lines(edges_path);

  const std::size_t n_graphs = graph_label_lines.size();
  std::vector<long long> raw_graph_labels;
  for (const auto& line : graph_label_lines)
    raw_graph_labels.push_back(parse_ints(line, graph_labels_path.string(), 1)[0]);

  // Global node -> (graph, local id).
  const std::size_t n_nodes = indicator_lines.size();
  std::vector<std::size_t> graph_of(n_nodes);
  std::vector<std::size_t> local_of(n_nodes);
  std::vector<std::size_t> graph_sizes(n_graphs, 0);
  for (std::size_t v = 0; v < n_nodes; ++v) {
    const long long gid = parse_ints(indicator_lines[v], indicator_path.string(), 1)[0];
    if (gid < 1 || static_cast<std::size_t>(gid) > n_graphs) {
      throw ParseError(indicator_path.string(), indicator_lines[v].line_no,
                       "graph id " + std::to_string(gid) + " outside [1, " + std::to_string(n_graphs) + "]");
    }
    graph_of[v] = static_cast<std::size_t>(gid - 1);
    local_of[v] = graph_sizes[graph_of[v]]++;
  }

  std::vector<long long> raw_node_labels(n_nodes, 0);
  if (std::filesystem::exists(node_labels_path)) {
    const auto lines = read_lines(node_labels_path);
    if (lines.size() != n_nodes)
      throw ParseError(node_labels_path.string(), 0,
                       std::to_string(lines.size()) + " node labels for " + std::to_string(n_nodes) + " nodes");
    for (std::size_t v = 0; v < n_nodes; ++v) {
      // Some corpora carry several attributes per node; the first is the label.
      std::string first = lines[v].text.substr(0, lines[v].text.find(','));
      raw_node_labels[v] = parse_ints({lines[v].line_no, first}, node_labels_path.string(), 1)[0];
    }
  }
  const auto node_labels = densify(raw_node_labels);

  std::vector<long long> raw_edge_labels(edge_lines.size(), 0);
  if (std::filesystem::exists(edge_labels_path)) {
    const auto lines = read_lines(edge_labels_path);
    if (lines.size() != edge_lines.size())
      throw ParseError(edge_labels_path.string(), 0,
                       std::to_string(lines.size()) + " edge labels for " + std::to_string(edge_lines.size()) +
                           " edges");
    for (std::size_t k = 0; k < lines.size(); ++k) {
      std::string first = lines[k].text.substr(0, lines[k].text.find(','));
      raw_edge_labels[k] = parse_ints({lines[k].line_no, first}, edge_labels_path.string(), 1)[0];
    }
  }
  const auto edge_labels = densify(raw_edge_labels);

  std::vector<std::vector<Label>> labels(n_graphs);
  for (std::size_t g = 0; g < n_graphs; ++g) labels[g].resize(graph_sizes[g]);
  for (std::size_t v = 0; v < n_nodes; ++v) labels[graph_of[v]][local_of[v]] = node_labels[v];

  std::vector<std::set<Edge>> edges(n_graphs);
  for (std::size_t k = 0; k < edge_lines.size(); ++k) {
    const auto ends = parse_ints(edge_lines[k], edges_path.string(), 2);
    for (long long id : ends) {
      if (id < 1 || static_cast<std::size_t>(id) > n_nodes)
        throw ParseError(edges_path.string(), edge_lines[k].line_no,
                         "node id " + std::to_string(id) + " outside [1, " + std::to_string(n_nodes) + "]");
    }
    const std::size_t u = static_cast<std::size_t>(ends[0] - 1);
    const std::size_t v = static_cast<std::size_t>(ends[1] - 1);
    if (graph_of[u] != graph_of[v]) {
      throw ParseError(edges_path.string(), edge_lines[k].line_no,
                       "edge joins node " + std::to_string(u + 1) + " of graph " + std::to_string(graph_of[u] + 1) +
                           " with node " + std::to_string(v + 1) + " of graph " + std::to_string(graph_of[v] + 1));
    }
    edges[graph_of[u]].insert(Edge{local_of[u], local_of[v], edge_labels[k]});
  }

  const auto classes = densify(raw_graph_labels);
  std::vector<LabeledGraph> out;
  out.reserve(n_graphs);
  for (std::size_t g = 0; g < n_graphs; ++g) {
    const auto& es = edges[g];
    const bool mirrored = std::all_of(es.begin(), es.end(),
                                      [&](const Edge& e) { return es.contains(Edge{e.dst, e.src, e.label}); });
    Graph graph(graph_sizes[g], std::move(labels[g]), mirrored);
    for (const Edge& e : es) graph.add_edge(e.src, e.dst, e.label);
    out.push_back({std::move(graph), classes[g]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Snapshots

void write_snapshot(std::ostream& out, std::span<const LabeledGraph> graphs) {
  for (const auto& lg : graphs) {
    write_graph(out, lg.graph);
    out << "class " << lg.class_id << "\n\n";
  }
}

std::vector<LabeledGraph> read_snapshot(std::istream& in, const std::string& source) {
  std::vector<LabeledGraph> out;
  std::size_t line_no = 0;
  std::string line;
  while (true) {
    // Skip separators; stop at end of input.
    std::streampos start = in.tellg();
    if (!std::getline(in, line)) break;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    in.clear();
    in.seekg(start);
    --line_no;

    // A record spans m + 2 graph lines plus the class line.
    std::string header = line;
    std::istringstream hs(header);
    std::size_t n = 0;
    std::size_t m = 0;
    if (!(hs >> n >> m)) throw ParseError(source, line_no + 1, "malformed graph header");
    std::ostringstream chunk;
    for (std::size_t k = 0; k < m + 2; ++k) {
      if (!std::getline(in, line)) throw ParseError(source, line_no + k + 1, "truncated graph record");
      chunk << line << '\n';
    }
    std::istringstream graph_in(chunk.str());
    Graph g;
    try {
      g = read_graph(graph_in, source);
    } catch (const ParseError& e) {
      throw ParseError(source, line_no + e.line(), "in graph record: " + std::string(e.what()));
    }
    line_no += m + 2;
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "missing class line");
    ++line_no;
    std::istringstream cs(line);
    std::string keyword;
    int cls = 0;
    if (!(cs >> keyword >> cls) || keyword != "class") throw ParseError(source, line_no, "expected 'class <id>'");
    out.push_back({std::move(g), cls});
  }
  return out;
}

}  // namespace expgnn
