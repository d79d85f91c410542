#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "expgnn/datasets.hpp"
#include "expgnn/errors.hpp"
#include "expgnn/oracles.hpp"
#include "test_util.hpp"

using namespace expgnn;

namespace {

const std::filesystem::path kTud = std::filesystem::path(EXPGNN_FIXTURE_DIR) / "tud";

bool connected_undirected(const Graph& g) {
  if (g.size() == 0) return true;
  Graph sym = Graph::undirected(g.size());
  for (const Edge& e : g.edges()) sym.add_edge(e.src, e.dst);
  for (NodeId v = 0; v < g.size(); ++v)
    if (!path_exists(sym, 0, v)) return false;
  return true;
}

}  // namespace

TEST(Datasets, NameRoundTrip) {
  for (Family f : {Family::uniform, Family::tree, Family::tree_plus_edge, Family::line, Family::cycle,
                   Family::two_paths, Family::csl, Family::tud})
    EXPECT_EQ(parse_family(to_string(f)), f);
  for (Labeler l : {Labeler::cycle, Labeler::clique4, Labeler::path, Labeler::degree7, Labeler::csl})
    EXPECT_EQ(parse_labeler(to_string(l)), l);
  EXPECT_FALSE(parse_family("bogus"));
}

TEST(Datasets, UniformEdgeCountIsBinomial) {
  const std::size_t n = 20, samples = 4000;
  const double p = 0.3, pairs = n * (n - 1);
  Rng rng(8);
  double sum = 0, sum_sq = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double m = static_cast<double>(gen_uniform(n, p, false, rng).edge_count());
    sum += m;
    sum_sq += m * m;
  }
  const double mean = sum / samples, var = sum_sq / samples - mean * mean;
  const double expected_var = pairs * p * (1 - p);
  EXPECT_NEAR(mean, pairs * p, 5 * std::sqrt(expected_var / samples));
  EXPECT_NEAR(var / expected_var, 1.0, 0.1);
}

TEST(Datasets, UniformHasNoSelfLoops) {
  Rng rng(1);
  const Graph g = gen_uniform(10, 0.9, false, rng);
  for (const Edge& e : g.edges()) EXPECT_NE(e.src, e.dst);
  EXPECT_THROW(gen_uniform(4, 1.0, false, rng), ContractError);
}

TEST(Datasets, TreesAreConnectedAndAcyclic) {
  Rng rng(2);
  for (std::size_t n : {1, 2, 5, 40}) {
    const LabeledGraph t = gen_tree(n, false, rng);
    EXPECT_EQ(t.graph.undirected_edge_count(), n - 1);
    EXPECT_TRUE(connected_undirected(t.graph));
    EXPECT_FALSE(has_cycle(t.graph));
    EXPECT_EQ(t.class_id, 0);
  }
  const LabeledGraph plus = gen_tree(30, true, rng);
  EXPECT_EQ(plus.graph.undirected_edge_count(), 30u);
  EXPECT_TRUE(has_cycle(plus.graph));
  EXPECT_EQ(plus.class_id, 1);
}

TEST(Datasets, LinesAndCycles) {
  const LabeledGraph line = gen_line_or_cycle(6, false), ring = gen_line_or_cycle(6, true);
  EXPECT_EQ(line.graph.undirected_edge_count(), 5u);
  EXPECT_EQ(ring.graph.undirected_edge_count(), 6u);
  EXPECT_EQ(line.class_id, 0);
  EXPECT_EQ(ring.class_id, 1);
}

TEST(Datasets, TwoPathsLayout) {
  const LabeledGraph apart = gen_two_paths(5, false), joined = gen_two_paths(5, true);
  EXPECT_EQ(apart.graph.size(), 10u);
  EXPECT_EQ(apart.graph.edge_count(), 8u);
  EXPECT_EQ(joined.graph.edge_count(), 8u);
  EXPECT_EQ(apart.graph.node_label(0), kSourceNode);
  EXPECT_EQ(apart.graph.node_label(9), kTargetNode);
  EXPECT_EQ(joined.graph.node_label(4), kTargetNode);
  EXPECT_EQ(apart.class_id, 0);
  EXPECT_EQ(joined.class_id, 1);
}

TEST(Datasets, CslGraphs) {
  EXPECT_EQ(csl_skips(41), (std::vector<std::size_t>{2, 3, 4, 5, 6, 9, 11, 12, 13, 16}));
  for (std::size_t skip : csl_skips(41)) {
    const Graph g = gen_csl(41, skip);
    EXPECT_EQ(g.undirected_edge_count(), 82u);
    for (const auto& nb : g.out_neighbors()) EXPECT_EQ(nb.size(), 4u);
    EXPECT_TRUE(g.has_edge(0, skip));
  }
}

TEST(Datasets, CslLabelerRecoversSkipIndex) {
  const auto skips = csl_skips(41);
  for (std::size_t k = 0; k < skips.size(); ++k) EXPECT_EQ(apply_labeler(Labeler::csl, gen_csl(41, skips[k])), int(k));
}

TEST(Datasets, PathGraphsHaveDistinctEnds) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const LabeledGraph lg = gen_path_dataset_graph(8, 0.2, rng);
    const auto& labels = lg.graph.node_labels();
    EXPECT_EQ(std::count(labels.begin(), labels.end(), kSourceNode), 1);
    EXPECT_EQ(std::count(labels.begin(), labels.end(), kTargetNode), 1);
    EXPECT_EQ(lg.class_id, apply_labeler(Labeler::path, lg.graph));
  }
}

TEST(Datasets, SampleIsDeterministicPerIndex) {
  DatasetSpec spec;
  spec.edge_prob = 0.2;
  spec.seed = 77;
  spec.count = 5;
  const auto all = generate(spec);
  EXPECT_EQ(sample(spec, 3), all[3]);
  spec.seed = 78;
  EXPECT_NE(sample(spec, 3), all[3]);
}

TEST(Datasets, TwoPathsFamilyEnumeratesPairs) {
  DatasetSpec spec;
  spec.family = Family::two_paths;
  spec.labeler = Labeler::path;
  spec.nodes = {5, 5};
  spec.count = 2;
  const auto pair = generate(spec);
  EXPECT_EQ(pair[0], gen_two_paths(5, false));
  EXPECT_EQ(pair[1], gen_two_paths(5, true));
}

TEST(Datasets, CslFamilyOnePerSkip) {
  DatasetSpec spec;
  spec.family = Family::csl;
  spec.labeler = Labeler::csl;
  spec.nodes = {41, 41};
  spec.count = 10;
  const auto graphs = generate(spec);
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_EQ(graphs[k].class_id, int(k));
    EXPECT_EQ(graphs[k].graph, gen_csl(41, csl_skips(41)[k]));
  }
}

TEST(Datasets, SpecValidation) {
  DatasetSpec spec;
  EXPECT_THROW(spec.validate(), ContractError);  // uniform without edge_prob
  spec.edge_prob = 0.5;
  EXPECT_NO_THROW(spec.validate());
  spec.family = Family::cycle;
  spec.nodes = {3, 65};
  spec.edge_prob.reset();
  EXPECT_THROW(spec.validate(), ContractError);
  spec.family = Family::csl;
  spec.labeler = Labeler::csl;
  spec.nodes = {41, 41};
  spec.count = 11;
  EXPECT_THROW(spec.validate(), ContractError);
  spec.family = Family::two_paths;
  spec.labeler = Labeler::cycle;
  spec.nodes = {5, 5};
  spec.count = 2;
  EXPECT_THROW(spec.validate(), ContractError);
}

TEST(Datasets, CalibrationHitsHalf) {
  CalibrationOptions o;
  o.seed = 5;
  const CalibrationResult c = calibrate_p(16, Labeler::clique4, o);
  EXPECT_GE(c.positive_rate, 0.45);
  EXPECT_LE(c.positive_rate, 0.55);
  const double fresh = positive_rate(16, Labeler::clique4, c.p, 10000, 999);
  EXPECT_GE(fresh, 0.45);
  EXPECT_LE(fresh, 0.55);
}

TEST(Datasets, CalibrationRejectsConstantLabeler) {
  EXPECT_THROW(calibrate_p(8, Labeler::always_true), CalibrationError);
}

TEST(Datasets, CalibrationRejectsDecreasingRate) {
  const PositiveSampler falling = [](double p, Rng& rng) { return uniform01(rng) > p; };
  EXPECT_THROW(calibrate_p(falling), CalibrationError);
}

TEST(Datasets, SnapshotRoundTrip) {
  Rng rng(10);
  std::vector<LabeledGraph> graphs;
  for (int k = 0; k < 6; ++k) graphs.push_back({testutil::random_graph(k + 3, 0.4, k % 2, rng, 3, 2), k % 3});
  graphs.push_back({Graph(2), 1});
  std::stringstream ss;
  write_snapshot(ss, graphs);
  const auto back = read_snapshot(ss);
  ASSERT_EQ(back.size(), graphs.size());
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    EXPECT_EQ(back[k].class_id, graphs[k].class_id);
    EXPECT_EQ(back[k].graph.node_labels(), graphs[k].graph.node_labels());
    EXPECT_EQ(back[k].graph.edges(), graphs[k].graph.edges());
  }
}

TEST(Datasets, SnapshotMissingClassLine) {
  std::stringstream ss("2 1\n0 1 0\n0 0\n");
  EXPECT_THROW(read_snapshot(ss), ParseError);
}

TEST(Tud, ToyCorpusMatchesHandBuiltGraphs) {
  const auto graphs = load_tud_corpus(kTud / "toy");
  ASSERT_EQ(graphs.size(), 2u);
  Graph triangle(3, {0, 1, 0}, true);
  triangle.add_edge(0, 1, 0);
  triangle.add_edge(1, 2, 1);
  triangle.add_edge(2, 0, 0);
  Graph edge(2, {2, 2}, true);
  edge.add_edge(0, 1, 0);
  EXPECT_EQ(graphs[0].graph, triangle);
  EXPECT_EQ(graphs[0].class_id, 1);
  EXPECT_EQ(graphs[1].graph, edge);
  EXPECT_EQ(graphs[1].class_id, 0);

  std::stringstream ss;
  write_snapshot(ss, graphs);
  EXPECT_EQ(read_snapshot(ss), graphs);
}

TEST(Tud, EmptyEdgeFile) {
  const auto graphs = load_tud_corpus(kTud / "empty_edges");
  ASSERT_EQ(graphs.size(), 1u);
  EXPECT_EQ(graphs[0].graph.size(), 2u);
  EXPECT_EQ(graphs[0].graph.edge_count(), 0u);
}

namespace {

void expect_parse_error(const std::string& dir, std::size_t line, const std::string& file_suffix) {
  try {
    load_tud_corpus(kTud / dir);
    FAIL() << "no error for " << dir;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_TRUE(e.file().ends_with(file_suffix)) << e.file();
  }
}

}  // namespace

TEST(Tud, EdgeAcrossGraphs) { expect_parse_error("cross_graph", 2, "_A.txt"); }
TEST(Tud, GraphIdOutOfRange) { expect_parse_error("bad_indicator", 2, "_graph_indicator.txt"); }
TEST(Tud, NonIntegerField) { expect_parse_error("bad_integer", 2, "_A.txt"); }
TEST(Tud, NodeLabelCountMismatch) { expect_parse_error("label_count", 0, "_node_labels.txt"); }

TEST(Tud, MissingDirectory) { EXPECT_THROW(load_tud_corpus(kTud / "absent"), IoError); }
