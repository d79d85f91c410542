#include "expgnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string_view>

#include "expgnn/errors.hpp"
#include "expgnn/model.hpp"
#include "expgnn/ops.hpp"

namespace expgnn {

namespace {

constexpr std::size_t kMaxRejectsPerProbe = 50;

std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  return h;
}

Tensor uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.values()) v = lo + (hi - lo) * uniform01(rng);
  return t;
}

Tensor inputs(std::size_t rows, std::size_t cols, Rng& rng) { return uniform(rows, cols, -2.0, 2.0, rng); }

double weighted_sum(const Tensor& out, const Tensor& weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) total += out[i] * weights[i];
  return total;
}

double norm(const Tensor& t) {
  double sq = 0.0;
  for (double v : t.values()) sq += v * v;
  return std::sqrt(sq);
}

// Unary and binary cases on freshly drawn matrices.
GradcheckCase simple(std::string name, std::vector<Shape> shapes, std::function<Var(std::span<const Var>)> fn) {
  return {std::move(name),
          [shapes](Rng& rng) {
            std::vector<Tensor> out;
            for (const Shape& s : shapes) out.push_back(inputs(s[0], s[1], rng));
            return out;
          },
          [fn = std::move(fn)](Tape&, std::span<const Var> v) { return fn(v); }};
}

BoolMatrix softmax_mask() {
  BoolMatrix m = BoolMatrix::square(5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) m.set(i, j, (i * 3 + j) % 4 != 0);
  for (std::size_t j = 0; j < 5; ++j) m.set(2, j, false);
  return m;
}

Graph probe_graph() {
  Graph g(5, {0, 1, 0, 1, 1});
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  g.add_edge(3, 1);
  g.add_edge(4, 0);
  g.add_edge(2, 4);
  return g;
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.d_model = 8;
  cfg.d_qk = 4;
  cfg.d_v = 4;
  cfg.heads_per_type = 1;
  cfg.random_id_width = 4;
  cfg.n_node_labels = 2;
  cfg.n_classes = 3;
  cfg.head_drop_p = 0.0;
  return cfg;
}

// Parameters with gains and biases moved off their initial values.
std::vector<Tensor> sample_params(const ModelConfig& cfg, Rng& rng) {
  ModelParams p = ModelParams::initialize(cfg, rng);
  for (auto& layer : p.layers) {
    for (NormParams* n : {&layer.inner, &layer.outer}) {
      n->gain = uniform(1, n->gain.cols(), 0.5, 1.5, rng);
      n->bias = uniform(1, n->bias.cols(), -0.5, 0.5, rng);
    }
  }
  p.readout.b1 = uniform(1, p.readout.b1.cols(), -0.5, 0.5, rng);
  p.readout.b2 = uniform(1, p.readout.b2.cols(), -0.5, 0.5, rng);
  std::vector<Tensor> out;
  for (const Tensor* t : p.tensors()) out.push_back(*t);
  return out;
}

BoundParams::Layer bind_layer(std::span<const Var> v, std::size_t& at, std::size_t heads) {
  BoundParams::Layer l;
  for (std::size_t h = 0; h < heads; ++h) {
    l.wq.push_back(v[at++]);
    l.wk.push_back(v[at++]);
    l.wv.push_back(v[at++]);
  }
  l.wq_all = concat_last(l.wq);
  l.wk_all = concat_last(l.wk);
  l.wv_all = concat_last(l.wv);
  l.inner_weight = v[at++];
  l.inner_gain = v[at++];
  l.inner_bias = v[at++];
  l.outer_weight = v[at++];
  l.outer_gain = v[at++];
  l.outer_bias = v[at++];
  return l;
}

// Inverse of BoundParams::leaves().
BoundParams bind_leaves(std::span<const Var> v, const ModelConfig& cfg) {
  BoundParams b;
  std::size_t at = 0;
  b.label_embedding = v[at++];
  for (std::size_t l = 0; l < cfg.n_layers; ++l) b.layers.push_back(bind_layer(v, at, cfg.head_count()));
  b.w1 = v[at++];
  b.b1 = v[at++];
  b.w2 = v[at++];
  b.b2 = v[at++];
  return b;
}

GradcheckCase layer_case() {
  const ModelConfig cfg = tiny_config();
  return {"layer",
          [cfg](Rng& rng) {
            std::vector<Tensor> all = sample_params(cfg, rng);
            // x, then the tensors of layer 0.
            std::vector<Tensor> out{inputs(5, cfg.d_model, rng)};
            const std::size_t per_layer = 3 * cfg.head_count() + 6;
            out.insert(out.end(), all.begin() + 1, all.begin() + 1 + static_cast<std::ptrdiff_t>(per_layer));
            return out;
          },
          [cfg](Tape&, std::span<const Var> v) {
            static const HeadMaskSet masks = build_head_masks(probe_graph(), cfg);
            BoundParams b;
            std::size_t at = 1;
            b.layers.push_back(bind_layer(v, at, cfg.head_count()));
            return layer_forward(v[0], masks, 0, b, cfg, DropMask{});
          }};
}

GradcheckCase end_to_end_case() {
  const ModelConfig cfg = tiny_config();
  return {"end_to_end",
          [cfg](Rng& rng) { return sample_params(cfg, rng); },
          [cfg](Tape& tape, std::span<const Var> v) {
            static const Graph g = probe_graph();
            static const HeadMaskSet masks = build_head_masks(g, cfg);
            static const ForwardNoise noise = [&] {
              Rng id_rng(7);
              return sample_noise(g, cfg, id_rng, false);
            }();
            const BoundParams b = bind_leaves(v, cfg);
            return cross_entropy(forward(tape, g, masks, b, cfg, noise), 1);
          }};
}

}  // namespace

GradcheckResult run_gradcheck(const GradcheckCase& c, const GradcheckOptions& options) {
  GradcheckResult result;
  result.name = c.name;
  Rng rng(derive_seed(options.seed, name_hash(c.name)));

  const auto loss_at = [&](const std::vector<Tensor>& values, const Tensor& weights) {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& t : values) leaves.push_back(tape.parameter(t));
    return weighted_sum(c.build(tape, leaves).value(), weights);
  };

  for (std::size_t probe = 0; probe < options.probes; ++probe) {
    std::vector<Tensor> values;
    std::unique_ptr<Tape> tape;
    std::vector<Var> leaves;
    Var out;
    std::size_t rejects = 0;
    while (true) {
      values = c.sample(rng);
      tape = std::make_unique<Tape>();
      leaves.clear();
      for (const Tensor& t : values) leaves.push_back(tape->leaf(t));
      out = c.build(*tape, leaves);
      if (tape->kink_margin() >= options.kink_threshold) break;
      ++result.rejected;
      if (++rejects > kMaxRejectsPerProbe) {
        result.passed = false;
        result.max_rel_error = INFINITY;
        return result;
      }
    }

    const Tensor weights = uniform(out.value().rows(), out.value().cols(), -1.0, 1.0, rng);
    const Var loss = sum(mul(out, tape->constant(weights)));
    const Gradients grads = tape->backward(loss);

    for (std::size_t i = 0; i < values.size(); ++i) {
      Tensor numeric = zeros_like(values[i]);
      for (std::size_t k = 0; k < values[i].size(); ++k) {
        const double saved = values[i][k];
        values[i][k] = saved + options.h;
        const double up = loss_at(values, weights);
        values[i][k] = saved - options.h;
        const double down = loss_at(values, weights);
        values[i][k] = saved;
        numeric[k] = (up - down) / (2.0 * options.h);
      }
      const Tensor& analytic = grads.of(leaves[i]);
      Tensor diff = analytic;
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= numeric[k];
      const double denom = std::max({norm(analytic), norm(numeric), 1e-12});
      const double rel = diff.empty() ? 0.0 : norm(diff) / denom;
      if (!(rel <= result.max_rel_error)) result.max_rel_error = rel;
    }
    ++result.probes;
  }
  result.passed = result.max_rel_error < options.tolerance;
  return result;
}

GradcheckReport run_gradcheck(std::span<const GradcheckCase> cases, const GradcheckOptions& options) {
  GradcheckReport report;
  report.vacuous = cases.empty();
  for (const GradcheckCase& c : cases) {
    report.results.push_back(run_gradcheck(c, options));
    report.passed = report.passed && report.results.back().passed;
  }
  return report;
}

std::vector<GradcheckCase> default_gradcheck_cases() {
  std::vector<GradcheckCase> cases;
  cases.push_back(simple("matmul", {{3, 4}, {4, 2}}, [](auto v) { return matmul(v[0], v[1]); }));
  cases.push_back(simple("matmul_nt", {{3, 4}, {2, 4}}, [](auto v) { return matmul_nt(v[0], v[1]); }));
  cases.push_back(simple("transpose", {{3, 4}}, [](auto v) { return transpose(v[0]); }));
  cases.push_back(simple("add", {{3, 4}, {3, 4}}, [](auto v) { return add(v[0], v[1]); }));
  cases.push_back(simple("mul", {{3, 4}, {3, 4}}, [](auto v) { return mul(v[0], v[1]); }));
  cases.push_back(simple("scale", {{3, 4}}, [](auto v) { return scale(v[0], -1.7); }));
  cases.push_back(simple("add_bias", {{4, 5}, {1, 5}}, [](auto v) { return add_bias(v[0], v[1]); }));
  cases.push_back(simple("mul_gain", {{4, 5}, {1, 5}}, [](auto v) { return mul_gain(v[0], v[1]); }));
  cases.push_back(simple("relu", {{4, 5}}, [](auto v) { return relu(v[0]); }));
  cases.push_back(simple("masked_softmax", {{5, 5}}, [](auto v) {
    static const BoolMatrix mask = softmax_mask();
    return masked_softmax(v[0], mask);
  }));
  cases.push_back(simple("standardize_rows", {{4, 8}}, [](auto v) { return standardize_rows(v[0]); }));
  cases.push_back(simple("layer_norm", {{4, 8}, {8, 6}, {1, 6}, {1, 6}},
                         [](auto v) { return layer_norm(v[0], v[1], v[2], v[3]); }));
  cases.push_back(simple("concat_last", {{3, 2}, {3, 0}, {3, 3}}, [](auto v) { return concat_last(v); }));
  cases.push_back(simple("reduce_max_rows", {{5, 4}}, [](auto v) {
    return reduce_max_rows(v[0], {true, false, true, true, true});
  }));
  cases.push_back(simple("gather_rows", {{4, 3}}, [](auto v) {
    static const std::size_t rows[] = {2, 0, 2, 3};
    return gather_rows(v[0], rows);
  }));
  cases.push_back(simple("sum", {{3, 4}}, [](auto v) { return sum(v[0]); }));
  cases.push_back(simple("slice_cols", {{3, 6}}, [](auto v) { return slice_cols(v[0], 2, 3); }));
  cases.push_back(simple("cross_entropy", {{1, 4}}, [](auto v) { return cross_entropy(v[0], 2); }));
  // Projections at Glorot scale: with entries near 2 the scores reach the
  // hundreds and the softmax gradient falls below finite-difference noise.
  cases.push_back({"attention_head",
                   [](Rng& rng) {
                     return std::vector<Tensor>{inputs(5, 8, rng), uniform(8, 4, -0.7, 0.7, rng),
                                                uniform(8, 4, -0.7, 0.7, rng), uniform(8, 3, -0.7, 0.7, rng)};
                   },
                   [](Tape&, std::span<const Var> v) {
                     static const BoolMatrix mask = adjacency(probe_graph());
                     return attention_head(v[0], v[0], v[0], v[1], v[2], v[3], mask);
                   }});
  cases.push_back(layer_case());
  cases.push_back(end_to_end_case());
  return cases;
}

GradcheckCase corrupted_gradcheck_case() {
  return simple("corrupted_relu", {{4, 5}}, [](auto v) {
    const Var x = v[0];
    Tensor out = x.value();
    double margin = INFINITY;
    for (double& e : out.values()) {
      margin = std::min(margin, std::abs(e));
      e = std::max(e, 0.0);
    }
    x.tape()->note_kink_margin(margin);
    return x.tape()->record(std::move(out), {x}, [](const BackwardArgs& args) {
      Tensor* gx = args.grads[0];
      if (!gx) return;
      for (std::size_t i = 0; i < gx->size(); ++i)
        if ((*args.inputs[0])[i] > 0.0) (*gx)[i] += 1.05 * args.grad_output[i];
    });
  });
}

}  // namespace expgnn
