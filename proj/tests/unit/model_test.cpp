#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "expgnn/datasets.hpp"
#include "expgnn/errors.hpp"
#include "expgnn/model.hpp"
#include "test_util.hpp"

using namespace expgnn;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.n_layers = 2;
  cfg.d_model = 16;
  cfg.d_qk = 4;
  cfg.d_v = 4;
  cfg.heads_per_type = 2;
  cfg.random_id_width = 6;
  cfg.n_node_labels = 2;
  cfg.n_edge_labels = 2;
  cfg.n_classes = 3;
  return cfg;
}

Tensor permute_rows(const Tensor& t, const std::vector<NodeId>& perm) {
  Tensor out = zeros_like(t);
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) out(perm[r], c) = t(r, c);
  return out;
}

}  // namespace

TEST(ModelConfig, Validation) {
  ModelConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.random_id_width = cfg.d_model;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg = {};
  cfg.head_drop_p = 1.0;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg = {};
  cfg.n_classes = 1;
  EXPECT_THROW(cfg.validate(), ContractError);
}

TEST(ModelConfig, EntriesRoundTrip) {
  ModelConfig cfg = small_config();
  cfg.windows = WindowSet::without_expanding();
  ModelConfig back;
  for (const auto& [key, value] : config_entries(cfg)) EXPECT_TRUE(set_config_entry(back, key, value)) << key;
  EXPECT_EQ(back, cfg);
  EXPECT_FALSE(set_config_entry(back, "no_such_key", "1"));
  EXPECT_THROW(set_config_entry(back, "d_model", "lots"), ContractError);
  EXPECT_THROW(set_config_entry(back, "windows", "neighbor,sideways"), ContractError);
  EXPECT_TRUE(set_config_entry(back, "windows", "none"));
  EXPECT_EQ(back.head_count(), 0u);
}

TEST(Model, HeadLayoutOrder) {
  const ModelConfig cfg = small_config();
  const auto heads = head_layout(cfg);
  ASSERT_EQ(heads.size(), (cfg.n_edge_labels + 4) * cfg.heads_per_type);
  EXPECT_EQ(heads.size(), cfg.head_count());
  EXPECT_EQ(heads[0].name(), "neighbor0.r0");
  EXPECT_EQ(heads[1].name(), "neighbor1.r0");
  EXPECT_EQ(heads[2].name(), "neighbor0.r1");
  EXPECT_EQ(heads[4].kind, WindowKind::reversed_neighbor);
  EXPECT_EQ(heads.back().kind, WindowKind::global);
  EXPECT_EQ(heads.back().replica, 1u);
}

TEST(Model, ParameterShapes) {
  const ModelConfig cfg = small_config();
  Rng rng(1);
  ModelParams p = ModelParams::initialize(cfg, rng);
  EXPECT_EQ(p.label_embedding.shape(), (Shape{2, 10}));
  ASSERT_EQ(p.layers.size(), 2u);
  EXPECT_EQ(p.layers[0].heads.size(), cfg.head_count());
  EXPECT_EQ(p.layers[0].inner.weight.shape(), (Shape{16 + cfg.head_output_width(), 16}));
  EXPECT_EQ(p.readout.w2.shape(), (Shape{16, 3}));
  const std::size_t h = cfg.head_count();
  const std::size_t per_layer = h * (16 * 4 * 3) + (16 + h * 4) * 16 + 2 * 16 + 16 * 16 + 2 * 16;
  EXPECT_EQ(p.parameter_count(), 2 * 10 + 2 * per_layer + 16 * 16 + 16 + 16 * 3 + 3);
  EXPECT_EQ(p.named(cfg).size(), p.tensors().size());
  EXPECT_EQ(p.named(cfg)[1].name, "layer0.neighbor0.r0.wq");
  for (double g : p.layers[1].outer.gain.values()) EXPECT_EQ(g, 1.0);
}

TEST(Model, HeadMasks) {
  ModelConfig cfg = small_config();
  Graph g(4);
  g.add_edge(0, 1, 0);
  g.add_edge(1, 2, 1);
  g.add_edge(2, 3, 0);
  const HeadMaskSet m = build_head_masks(g, cfg);
  const auto windows = window_sequence(adjacency(g), cfg.n_layers);
  for (std::size_t layer = 0; layer < cfg.n_layers; ++layer) {
    for (std::size_t h = 0; h < m.heads.size(); ++h) {
      const HeadSpec& spec = m.heads[h];
      const BoolMatrix& mask = m.at(layer, h);
      switch (spec.kind) {
        case WindowKind::neighbor:
          EXPECT_EQ(mask, adjacency(g, spec.edge_label));
          break;
        case WindowKind::reversed_neighbor:
          EXPECT_EQ(mask, adjacency(g).transposed());
          break;
        case WindowKind::expanding:
          EXPECT_EQ(mask, windows[layer]);
          break;
        case WindowKind::reversed_expanding:
          EXPECT_EQ(mask, windows[layer].transposed());
          break;
        case WindowKind::global:
          EXPECT_EQ(mask.count(), 16u);
          break;
      }
    }
  }
  g.add_edge(3, 0, 2);
  EXPECT_THROW(build_head_masks(g, cfg), ContractError);
}

TEST(Model, PaddedMasks) {
  const ModelConfig cfg = small_config();
  Graph g(2);
  g.add_edge(0, 1);
  const HeadMaskSet m = build_head_masks(g, cfg, 5);
  EXPECT_EQ(m.valid, (std::vector<bool>{true, true, false, false, false}));
  for (const auto& layer : m.masks)
    for (const BoolMatrix& mask : layer) {
      EXPECT_EQ(mask.rows(), 5u);
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 2; j < 5; ++j) EXPECT_FALSE(mask.get(i, j) || mask.get(j, i));
    }
}

TEST(Model, IdentifiersAreFairBits) {
  Rng rng(2);
  const Tensor ids = sample_identifiers(100, 100, rng);
  double sum = 0;
  for (double v : ids.values()) {
    EXPECT_TRUE(v == 0.0 || v == 1.0);
    sum += v;
  }
  EXPECT_NEAR(sum / ids.size(), 0.5, 0.02);
}

TEST(Model, HeadDropoutFrequency) {
  ModelConfig cfg;
  Rng rng(3);
  std::size_t dropped = 0, total = 0;
  for (int k = 0; k < 10000; ++k) {
    const DropMask d = sample_head_dropout(cfg, rng, true);
    for (bool b : d) dropped += b;
    total += d.size();
  }
  EXPECT_NEAR(double(dropped) / double(total), 0.1, 0.01);
  const DropMask eval = sample_head_dropout(cfg, rng, false);
  for (bool b : eval) EXPECT_FALSE(b);
}

TEST(Model, ForwardIsDeterministicGivenNoise) {
  const ModelConfig cfg = small_config();
  Rng rng(4);
  const ModelParams p = ModelParams::initialize(cfg, rng);
  const Graph g = testutil::random_graph(7, 0.3, false, rng, 2, 2);
  const ForwardNoise noise = sample_noise(g, cfg, rng, false);
  const Tensor a = forward(g, p, cfg, noise), b = forward(g, p, cfg, noise);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.shape(), (Shape{1, 3}));
}

TEST(Model, DroppedHeadsIgnoreTheirWeights) {
  const ModelConfig cfg = small_config();
  Rng rng(5);
  ModelParams p = ModelParams::initialize(cfg, rng);
  const Graph g = testutil::random_graph(6, 0.4, false, rng, 2, 2);
  ForwardNoise noise = sample_noise(g, cfg, rng, false);
  noise.drop[static_cast<std::size_t>(WindowKind::global)] = true;
  const Tensor before = forward(g, p, cfg, noise);
  const auto heads = head_layout(cfg);
  for (auto& layer : p.layers)
    for (std::size_t h = 0; h < heads.size(); ++h)
      if (heads[h].kind == WindowKind::global) layer.heads[h].wv.fill(3.0);
  EXPECT_EQ(forward(g, p, cfg, noise), before);
  noise.drop[static_cast<std::size_t>(WindowKind::global)] = false;
  EXPECT_NE(forward(g, p, cfg, noise), before);
}

TEST(Model, UnknownNodeLabelRejected) {
  const ModelConfig cfg = small_config();
  Rng rng(6);
  const ModelParams p = ModelParams::initialize(cfg, rng);
  Graph g(3, {0, 1, 2});
  EXPECT_THROW(forward(g, p, cfg, rng, false), ContractError);
}

TEST(Model, IdentifierShapeChecked) {
  const ModelConfig cfg = small_config();
  Rng rng(6);
  const ModelParams p = ModelParams::initialize(cfg, rng);
  ForwardNoise noise;
  noise.identifiers = Tensor::matrix(2, cfg.random_id_width);
  EXPECT_THROW(forward(Graph(3), p, cfg, noise), DimensionError);
}

TEST(Model, EquivariantUnderConsistentPermutation) {
  const ModelConfig cfg = small_config();
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams p = ModelParams::initialize(cfg, rng);
    const std::size_t n = uniform_between(rng, 1, 10);
    const Graph g = testutil::random_graph(n, 0.3, false, rng, 2, 2);
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const ForwardNoise noise = sample_noise(g, cfg, rng, false);
    ForwardNoise moved = noise;
    moved.identifiers = permute_rows(noise.identifiers, perm);
    EXPECT_LT(max_abs_diff(forward(g, p, cfg, noise), forward(permute(g, perm), p, cfg, moved)), 1e-9);
  }
}

TEST(Model, CollapseWithoutIdentifiersOrWindows) {
  ModelConfig cfg;
  cfg.random_id_width = 0;
  cfg.n_classes = 10;
  cfg.windows.enabled.fill(false);
  cfg.windows.set(WindowKind::neighbor, true);
  cfg.windows.set(WindowKind::global, true);
  const Graph a = gen_csl(41, 2), b = gen_csl(41, 3);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed);
    const ModelParams p = ModelParams::initialize(cfg, rng);
    EXPECT_LT(max_abs_diff(forward(a, p, cfg, rng, false), forward(b, p, cfg, rng, false)), 1e-6);
  }
}

TEST(Model, IdentifiersSeparateCslGraphs) {
  ModelConfig cfg;
  cfg.n_classes = 10;
  Rng rng(9);
  const ModelParams p = ModelParams::initialize(cfg, rng);
  EXPECT_GT(max_abs_diff(forward(gen_csl(41, 2), p, cfg, rng, false), forward(gen_csl(41, 3), p, cfg, rng, false)),
            1e-6);
}

TEST(Model, CheckpointRoundTrip) {
  ModelConfig cfg = small_config();
  cfg.windows.set(WindowKind::reversed_expanding, false);
  Rng rng(8);
  ModelParams p = ModelParams::initialize(cfg, rng);
  std::stringstream ss;
  save_checkpoint(ss, cfg, p);
  const Checkpoint back = load_checkpoint(ss);
  EXPECT_EQ(back.config, cfg);
  EXPECT_EQ(back.params, p);
}

TEST(Model, CheckpointErrors) {
  std::stringstream bad("not a checkpoint\n");
  EXPECT_THROW(load_checkpoint(bad), ParseError);

  const ModelConfig cfg = small_config();
  Rng rng(8);
  ModelParams p = ModelParams::initialize(cfg, rng);
  std::stringstream ss;
  save_checkpoint(ss, cfg, p);
  std::string text = ss.str();
  std::stringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_checkpoint(truncated), ParseError);
}
