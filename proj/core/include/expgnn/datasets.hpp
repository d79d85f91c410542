#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expgnn/graph.hpp"
#include "expgnn/random.hpp"

namespace expgnn {

enum class Family { uniform, tree, tree_plus_edge, line, cycle, two_paths, csl, tud };
enum class Labeler { cycle, clique4, path, degree7, csl, always_true };

std::string_view to_string(Family family);
std::string_view to_string(Labeler labeler);
std::optional<Family> parse_family(std::string_view name);
std::optional<Labeler> parse_labeler(std::string_view name);

/// Node labels used by the path task.
inline constexpr Label kPlainNode = 0;
inline constexpr Label kSourceNode = 1;  // "a"
inline constexpr Label kTargetNode = 2;  // "b"

/// Skip lengths of the ten classic circulant graphs on 41 nodes.
inline constexpr std::size_t kCslSkips[] = {2, 3, 4, 5, 6, 9, 11, 12, 13, 16};

struct NodeRange {
  std::size_t min = 0;
  std::size_t max = 0;
};

/// Declarative description of a synthetic dataset. `nodes` is the node
/// count for uniform/tree/csl families and the path length for
/// line/cycle/two_paths.
struct DatasetSpec {
  Family family = Family::uniform;
  NodeRange nodes{16, 16};
  std::optional<double> edge_prob;
  Labeler labeler = Labeler::cycle;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  /// Corpus directory for Family::tud.
  std::string source;

  /// Throws ContractError on inconsistent fields.
  void validate() const;
};

struct LabeledGraph {
  Graph graph;
  int class_id = 0;

  friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;
};

/// Whether the labeler works on symmetric (undirected) graphs.
bool labeler_is_symmetric(Labeler labeler);
/// Applies the labeler's oracle. Labeler::path looks for the nodes labelled a and b.
int apply_labeler(Labeler labeler, const Graph& g);
std::size_t class_count(Labeler labeler);

// Generators. Each one consumes randomness only from the given generator.

Graph gen_uniform(std::size_t n, double p, bool symmetric, Rng& rng);
LabeledGraph gen_tree(std::size_t n, bool extra_edge, Rng& rng);
LabeledGraph gen_line_or_cycle(std::size_t len, bool cycle);
/// Two directed paths of `len` nodes each: nodes [0, len) and [len, 2 len).
/// a is node 0; b ends the first path when connected, the second otherwise.
LabeledGraph gen_two_paths(std::size_t len, bool connected);
Graph gen_csl(std::size_t n, std::size_t skip);
/// Uniform directed graph with two distinct nodes labelled a and b.
LabeledGraph gen_path_dataset_graph(std::size_t n, double p, Rng& rng);

/// Skip lengths used for a CSL family on n nodes.
std::vector<std::size_t> csl_skips(std::size_t n);

/// Graph number `index` of the dataset; graph k is generated from stream
/// seed ^ k, so any slice can be produced independently. The two_paths and
/// csl families are enumerated instead: two_paths yields the disconnected
/// and connected graph of each length in turn, csl one graph per skip.
LabeledGraph sample(const DatasetSpec& spec, std::uint64_t index);
/// First spec.count graphs (the whole corpus for Family::tud).
std::vector<LabeledGraph> generate(const DatasetSpec& spec);

struct CalibrationOptions {
  std::size_t samples = 2000;
  std::size_t iterations = 20;
  std::uint64_t seed = 0;
};

struct CalibrationResult {
  double p = 0.0;
  double positive_rate = 0.0;
};

/// Returns whether one graph drawn with edge probability p is positive.
using PositiveSampler = std::function<bool(double p, Rng& rng)>;

/// Bisection on p for a positive rate of one half, estimated with the same
/// random stream at every probe. Throws CalibrationError when the rate is
/// not increasing in p or no probe lands in [0.45, 0.55].
CalibrationResult calibrate_p(const PositiveSampler& positive, const CalibrationOptions& options = {});
CalibrationResult calibrate_p(std::size_t n, Labeler labeler, const CalibrationOptions& options = {});

/// Fraction of positives among `samples` fresh graphs drawn at p.
double positive_rate(std::size_t n, Labeler labeler, double p, std::size_t samples, std::uint64_t seed);

/// Reads a graph-classification corpus in the TU Dortmund layout:
///   DS_A.txt               "i, j" per line, 1-based global node ids
///   DS_graph_indicator.txt 1-based graph id of node i on line i
///   DS_graph_labels.txt    class of graph g on line g
///   DS_node_labels.txt     optional, one label per node
///   DS_edge_labels.txt     optional, one label per line of DS_A.txt
/// Node ids are rebased to 0 within each graph. Graph labels, node labels
/// and edge labels are each renumbered densely in sorted order, so 1-based
/// files come out 0-based. `name` defaults to the prefix of the *_A.txt file.
std::vector<LabeledGraph> load_tud_corpus(const std::filesystem::path& dir, std::string name = {});

/// Record format: the graph text form, then "class <id>", then a blank line.
void write_snapshot(std::ostream& out, std::span<const LabeledGraph> graphs);
std::vector<LabeledGraph> read_snapshot(std::istream& in, const std::string& source = "<stream>");

}  // namespace expgnn
