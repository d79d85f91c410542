#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "expgnn/datasets.hpp"
#include "expgnn/errors.hpp"
#include "expgnn/training.hpp"
#include "test_util.hpp"

using namespace expgnn;

namespace {

struct ScalarAdam {
  double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-7;
  double m = 0, v = 0;
  int t = 0;
  double step(double w, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double m_hat = m / (1 - std::pow(b1, t));
    const double v_hat = v / (1 - std::pow(b2, t));
    return w - lr * m_hat / (std::sqrt(v_hat) + eps);
  }
};

ModelConfig tiny_config(std::size_t classes) {
  ModelConfig cfg;
  cfg.n_layers = 2;
  cfg.d_model = 16;
  cfg.d_qk = 4;
  cfg.d_v = 4;
  cfg.heads_per_type = 1;
  cfg.random_id_width = 8;
  cfg.n_classes = classes;
  return cfg;
}

DatasetSpec csl_spec() {
  DatasetSpec spec;
  spec.family = Family::csl;
  spec.nodes = {41, 41};
  spec.labeler = Labeler::csl;
  spec.count = 10;
  return spec;
}

}  // namespace

TEST(Adam, MatchesScalarReference) {
  Rng rng(1);
  Tensor w = testutil::random_tensor(1, 3, rng);
  std::vector<Tensor*> params{&w};
  std::vector<const Tensor*> cparams{&w};
  AdamState state = AdamState::for_params(cparams);
  std::vector<ScalarAdam> ref(3);
  std::vector<double> expect(w.values().begin(), w.values().end());
  for (int step = 0; step < 100; ++step) {
    const Tensor g = testutil::random_tensor(1, 3, rng, -5, 5);
    for (std::size_t i = 0; i < 3; ++i) expect[i] = ref[i].step(expect[i], g[i]);
    adam_step(state, std::span<const Tensor>(&g, 1), params);
    for (std::size_t i = 0; i < 3; ++i) ASSERT_NEAR(w[i], expect[i], 1e-12) << "step " << step;
  }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Tensor w = Tensor::row({1, -2});
  const Tensor before = w;
  std::vector<Tensor*> params{&w};
  std::vector<const Tensor*> cparams{&w};
  AdamState state = AdamState::for_params(cparams);
  const Tensor g = zeros_like(w);
  adam_step(state, std::span<const Tensor>(&g, 1), params);
  EXPECT_EQ(w, before);
}

TEST(Adam, FirstStepIsLearningRate) {
  Tensor w = Tensor::scalar(0.0);
  std::vector<Tensor*> params{&w};
  std::vector<const Tensor*> cparams{&w};
  AdamState state = AdamState::for_params(cparams);
  const Tensor g = Tensor::scalar(1.0);
  adam_step(state, std::span<const Tensor>(&g, 1), params);
  EXPECT_NEAR(w.item(), -1e-3 / (1 + 1e-7), 1e-15);
}

TEST(Adam, ConvergesOnQuadratic) {
  Tensor w = Tensor::scalar(0.0);
  std::vector<Tensor*> params{&w};
  std::vector<const Tensor*> cparams{&w};
  AdamHyper h;
  h.lr = 1e-2;
  AdamState state = AdamState::for_params(cparams, h);
  for (int step = 0; step < 5000; ++step) {
    const Tensor g = Tensor::scalar(2 * (w.item() - 3));
    adam_step(state, std::span<const Tensor>(&g, 1), params);
  }
  EXPECT_LT(std::abs(w.item() - 3), 1e-2);
}

TEST(Adam, ShapeMismatch) {
  Tensor w = Tensor::row({1, 2});
  std::vector<Tensor*> params{&w};
  std::vector<const Tensor*> cparams{&w};
  AdamState state = AdamState::for_params(cparams);
  const Tensor g = Tensor::row({1, 2, 3});
  EXPECT_THROW(adam_step(state, std::span<const Tensor>(&g, 1), params), ContractError);
}

TEST(Training, PredictTiesToLowestIndex) {
  EXPECT_EQ(predict(Tensor::row({1, 3, 3})), 1u);
  EXPECT_EQ(predict(Tensor::row({5, 0})), 0u);
}

TEST(Training, BatchGradientsMatchFiniteDifferences) {
  const ModelConfig cfg = tiny_config(2);
  Rng rng(2);
  ModelParams p = ModelParams::initialize(cfg, rng);
  std::vector<LabeledGraph> batch{{testutil::random_graph(5, 0.4, false, rng), 1},
                                  {testutil::random_graph(4, 0.4, false, rng), 0}};
  const std::vector<std::uint64_t> seeds{11, 12};
  const BatchResult r = batch_gradients(p, cfg, batch, seeds, true);
  const auto loss = [&](const ModelParams& q) { return batch_gradients(q, cfg, batch, seeds, true).mean_loss; };
  // Readout bias: a smooth function of its entries.
  Tensor& b2 = p.readout.b2;
  const std::size_t idx = p.tensors().size() - 1;
  for (std::size_t k = 0; k < b2.size(); ++k) {
    const double saved = b2[k];
    b2[k] = saved + 1e-6;
    const double up = loss(p);
    b2[k] = saved - 1e-6;
    const double down = loss(p);
    b2[k] = saved;
    EXPECT_NEAR(r.grads[idx][k], (up - down) / 2e-6, 1e-6);
  }
}

TEST(Training, ThreadCountDoesNotChangeGradients) {
  const ModelConfig cfg = tiny_config(2);
  Rng rng(3);
  const ModelParams p = ModelParams::initialize(cfg, rng);
  std::vector<LabeledGraph> batch;
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < 5; ++k) {
    batch.push_back({testutil::random_graph(6, 0.3, false, rng), k % 2});
    seeds.push_back(100 + k);
  }
  const BatchResult one = batch_gradients(p, cfg, batch, seeds, true, 1);
  const BatchResult three = batch_gradients(p, cfg, batch, seeds, true, 3);
  EXPECT_NEAR(one.mean_loss, three.mean_loss, 1e-12);
  for (std::size_t i = 0; i < one.grads.size(); ++i) EXPECT_LT(max_abs_diff(one.grads[i], three.grads[i]), 1e-12);
}

TEST(Training, ZeroStepsReturnsInitialization) {
  const ModelConfig cfg = tiny_config(10);
  const TrainResult r = train(csl_spec(), cfg, 0, 4, 5);
  TrainOptions o;
  o.seed = 5;
  o.steps = 0;
  const TrainResult again = train(SpecSource(csl_spec()), cfg, o);
  EXPECT_EQ(r.params, again.params);
  EXPECT_EQ(r.report.steps, 0u);
}

TEST(Training, SameSeedSameParameters) {
  const ModelConfig cfg = tiny_config(10);
  const TrainResult a = train(csl_spec(), cfg, 5, 4, 9);
  const TrainResult b = train(csl_spec(), cfg, 5, 4, 9);
  const TrainResult c = train(csl_spec(), cfg, 5, 4, 10);
  EXPECT_EQ(a.params, b.params);
  EXPECT_NE(a.params, c.params);
}

TEST(Training, LossDecreasesOnFixedBatch) {
  ModelConfig cfg = tiny_config(10);
  cfg.head_drop_p = 0.0;
  DatasetSpec spec = csl_spec();
  const auto graphs = generate(spec);
  TrainOptions o;
  o.steps = 60;
  o.batch_size = 10;
  o.log_every = 10;
  o.seed = 3;
  o.adam.lr = 3e-3;
  const TrainResult r = train(FixedSource(graphs), cfg, o);
  ASSERT_GE(r.report.log.size(), 2u);
  EXPECT_LT(r.report.log.back().mean_loss, r.report.log.front().mean_loss);
}

TEST(Training, DivergenceAborts) {
  ModelConfig cfg = tiny_config(10);
  TrainOptions o;
  o.steps = 5;
  o.batch_size = 2;
  o.adam.lr = 1e300;
  EXPECT_THROW(train(SpecSource(csl_spec()), cfg, o), DivergenceError);
}

TEST(Evaluate, UntrainedModelNearChance) {
  const ModelConfig cfg = tiny_config(10);
  Rng rng(4);
  const ModelParams p = ModelParams::initialize(cfg, rng);
  const EvalStats s = evaluate(p, cfg, generate(csl_spec()), 15, 1, "csl");
  EXPECT_EQ(s.instances, 150u);
  EXPECT_EQ(s.resamples, 15u);
  EXPECT_LE(s.mean, 0.2 + 0.1);
  EXPECT_LE(s.min, s.mean + 1e-12);
  EXPECT_GE(s.max, s.mean - 1e-12);
}

TEST(Evaluate, NoIdentifiersMeansNoSpread) {
  ModelConfig cfg = tiny_config(10);
  cfg.random_id_width = 0;
  Rng rng(5);
  const ModelParams p = ModelParams::initialize(cfg, rng);
  const EvalStats s = evaluate(p, cfg, generate(csl_spec()), 5, 1);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_EQ(s.min, s.max);
}

TEST(Evaluate, SeedFixesResult) {
  const ModelConfig cfg = tiny_config(10);
  Rng rng(6);
  const ModelParams p = ModelParams::initialize(cfg, rng);
  const auto graphs = generate(csl_spec());
  const EvalStats a = evaluate(p, cfg, graphs, 3, 42), b = evaluate(p, cfg, graphs, 3, 42);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std, b.std);
  EXPECT_THROW(evaluate(p, cfg, graphs, 0, 42), ContractError);
}

TEST(Results, CsvAndTable) {
  const std::vector<EvalStats> rows{{"csl", 0.9, 0.05, 0.8, 1.0, 15, 150}};
  std::stringstream csv, table;
  write_results_csv(csv, rows);
  write_results_table(table, rows);
  std::string header, line;
  std::getline(csv, header);
  std::getline(csv, line);
  EXPECT_EQ(header, "name,mean,std,min,max,resamples,instances");
  EXPECT_TRUE(line.starts_with("csl,0.9"));
  EXPECT_NE(table.str().find("mean"), std::string::npos);
  EXPECT_NE(table.str().find("csl"), std::string::npos);
}
