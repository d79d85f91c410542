#include "expgnn/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "expgnn/errors.hpp"
#include "expgnn/ops.hpp"

namespace expgnn {

namespace {

constexpr std::array<std::string_view, kWindowKinds> kKindNames{"neighbor", "reversed_neighbor", "expanding",
                                                                "reversed_expanding", "global"};
constexpr std::string_view kCheckpointMagic = "expgnn-checkpoint";
constexpr int kCheckpointVersion = 1;

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t = Tensor::matrix(fan_in, fan_out);
  for (double& v : t.values()) v = limit * (2.0 * uniform01(rng) - 1.0);
  return t;
}

NormParams init_norm(std::size_t d_in, std::size_t width, Rng& rng) {
  return {glorot(d_in, width, rng), Tensor::matrix(1, width, 1.0), Tensor::matrix(1, width, 0.0)};
}

template <typename Params, typename Fn>
void visit_params(Params& params, const ModelConfig& cfg, Fn&& fn) {
  fn(std::string("embed.label"), params.label_embedding);
  const auto layout = head_layout(cfg);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const std::string head = prefix + layout.at(h).name() + ".";
      fn(head + "wq", layer.heads[h].wq);
      fn(head + "wk", layer.heads[h].wk);
      fn(head + "wv", layer.heads[h].wv);
    }
    fn(prefix + "inner.weight", layer.inner.weight);
    fn(prefix + "inner.gain", layer.inner.gain);
    fn(prefix + "inner.bias", layer.inner.bias);
    fn(prefix + "outer.weight", layer.outer.weight);
    fn(prefix + "outer.gain", layer.outer.gain);
    fn(prefix + "outer.bias", layer.outer.bias);
  }
  fn(std::string("readout.w1"), params.readout.w1);
  fn(std::string("readout.b1"), params.readout.b1);
  fn(std::string("readout.w2"), params.readout.w2);
  fn(std::string("readout.b2"), params.readout.b2);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw ContractError("config: bad value '" + std::string(text) + "' for " + std::string(key));
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::string_view to_string(WindowKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

WindowSet WindowSet::without_expanding() {
  WindowSet w;
  w.set(WindowKind::expanding, false);
  w.set(WindowKind::reversed_expanding, false);
  return w;
}

std::size_t ModelConfig::head_count() const {
  std::size_t per_replica = 0;
  for (std::size_t k = 0; k < kWindowKinds; ++k) {
    if (!windows.enabled[k]) continue;
    per_replica += static_cast<WindowKind>(k) == WindowKind::neighbor ? n_edge_labels : 1;
  }
  return per_replica * heads_per_type;
}

void ModelConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw ContractError("model config: " + msg); };
  if (n_layers == 0) fail("n_layers must be positive");
  if (d_model == 0 || d_qk == 0 || d_v == 0) fail("widths must be positive");
  if (random_id_width >= d_model) fail("random_id_width must leave a positive label-embedding width");
  if (!(head_drop_p >= 0.0 && head_drop_p < 1.0)) fail("head_drop_p must lie in [0, 1)");
  if (n_edge_labels == 0 || n_node_labels == 0) fail("label counts must be positive");
  if (n_classes < 2) fail("n_classes must be at least 2");
}

std::vector<std::pair<std::string, std::string>> config_entries(const ModelConfig& cfg) {
  std::string windows;
  for (std::size_t k = 0; k < kWindowKinds; ++k) {
    if (!cfg.windows.enabled[k]) continue;
    if (!windows.empty()) windows += ',';
    windows += kKindNames[k];
  }
  if (windows.empty()) windows = "none";
  return {
      {"n_layers", std::to_string(cfg.n_layers)},
      {"d_model", std::to_string(cfg.d_model)},
      {"d_qk", std::to_string(cfg.d_qk)},
      {"d_v", std::to_string(cfg.d_v)},
      {"heads_per_type", std::to_string(cfg.heads_per_type)},
      {"head_drop_p", format_double(cfg.head_drop_p)},
      {"n_edge_labels", std::to_string(cfg.n_edge_labels)},
      {"n_node_labels", std::to_string(cfg.n_node_labels)},
      {"n_classes", std::to_string(cfg.n_classes)},
      {"random_id_width", std::to_string(cfg.random_id_width)},
      {"windows", windows},
  };
}

bool set_config_entry(ModelConfig& cfg, std::string_view key, std::string_view value) {
  const std::map<std::string_view, std::size_t*> counts{
      {"n_layers", &cfg.n_layers},         {"d_model", &cfg.d_model},
      {"d_qk", &cfg.d_qk},                 {"d_v", &cfg.d_v},
      {"heads_per_type", &cfg.heads_per_type}, {"n_edge_labels", &cfg.n_edge_labels},
      {"n_node_labels", &cfg.n_node_labels}, {"n_classes", &cfg.n_classes},
      {"random_id_width", &cfg.random_id_width},
  };
  if (const auto it = counts.find(key); it != counts.end()) {
    *it->second = parse_number<std::size_t>(value, key);
    return true;
  }
  if (key == "head_drop_p") {
    cfg.head_drop_p = parse_number<double>(value, key);
    return true;
  }
  if (key == "windows") {
    WindowSet w;
    w.enabled.fill(false);
    std::string_view rest = value;
    while (!rest.empty() && rest != "none") {
      const auto comma = rest.find(',');
      const std::string_view name = rest.substr(0, comma);
      bool found = false;
      for (std::size_t k = 0; k < kWindowKinds; ++k) {
        if (kKindNames[k] == name) {
          w.enabled[k] = true;
          found = true;
        }
      }
      if (!found) throw ContractError("config: unknown window kind '" + std::string(name) + "'");
      rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
    }
    cfg.windows = w;
    return true;
  }
  return false;
}

std::string HeadSpec::name() const {
  std::string out(to_string(kind));
  if (kind == WindowKind::neighbor) out += std::to_string(edge_label);
  return out + ".r" + std::to_string(replica);
}

std::vector<HeadSpec> head_layout(const ModelConfig& cfg) {
  std::vector<HeadSpec> heads;
  for (std::size_t k = 0; k < kWindowKinds; ++k) {
    if (!cfg.windows.enabled[k]) continue;
    const auto kind = static_cast<WindowKind>(k);
    for (std::size_t r = 0; r < cfg.heads_per_type; ++r) {
      if (kind == WindowKind::neighbor) {
        for (std::size_t l = 0; l < cfg.n_edge_labels; ++l) heads.push_back({kind, static_cast<Label>(l), r});
      } else {
        heads.push_back({kind, 0, r});
      }
    }
  }
  return heads;
}

ModelParams ModelParams::initialize(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  ModelParams p;
  p.label_embedding = glorot(cfg.n_node_labels, cfg.label_width(), rng);
  const std::size_t heads = cfg.head_count();
  p.layers.resize(cfg.n_layers);
  for (auto& layer : p.layers) {
    layer.heads.resize(heads);
    for (auto& h : layer.heads) {
      h.wq = glorot(cfg.d_model, cfg.d_qk, rng);
      h.wk = glorot(cfg.d_model, cfg.d_qk, rng);
      h.wv = glorot(cfg.d_model, cfg.d_v, rng);
    }
    layer.inner = init_norm(cfg.d_model + cfg.head_output_width(), cfg.d_model, rng);
    layer.outer = init_norm(cfg.d_model, cfg.d_model, rng);
  }
  p.readout.w1 = glorot(cfg.d_model, cfg.d_model, rng);
  p.readout.b1 = Tensor::matrix(1, cfg.d_model);
  p.readout.w2 = glorot(cfg.d_model, cfg.n_classes, rng);
  p.readout.b2 = Tensor::matrix(1, cfg.n_classes);
  return p;
}

std::vector<NamedTensor> ModelParams::named(const ModelConfig& cfg) {
  std::vector<NamedTensor> out;
  visit_params(*this, cfg, [&](std::string name, Tensor& t) { out.push_back({std::move(name), &t}); });
  return out;
}

std::vector<const Tensor*> ModelParams::tensors() const {
  std::vector<const Tensor*> out;
  out.push_back(&label_embedding);
  for (const auto& layer : layers) {
    for (const auto& h : layer.heads) {
      out.push_back(&h.wq);
      out.push_back(&h.wk);
      out.push_back(&h.wv);
    }
    for (const NormParams* n : {&layer.inner, &layer.outer}) {
      out.push_back(&n->weight);
      out.push_back(&n->gain);
      out.push_back(&n->bias);
    }
  }
  for (const Tensor* t : {&readout.w1, &readout.b1, &readout.w2, &readout.b2}) out.push_back(t);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t total = 0;
  for (const Tensor* t : tensors()) total += t->size();
  return total;
}

HeadMaskSet build_head_masks(const Graph& g, const ModelConfig& cfg, std::size_t padded_n) {
  const std::size_t n = g.size();
  const std::size_t width = padded_n ? padded_n : n;
  if (width < n) throw ContractError("build_head_masks: padding below the node count");
  for (const Edge& e : g.edges()) {
    if (e.label < 0 || static_cast<std::size_t>(e.label) >= cfg.n_edge_labels) {
      throw ContractError("build_head_masks: edge label " + std::to_string(e.label) + " outside the " +
                          std::to_string(cfg.n_edge_labels) + " configured labels");
    }
  }

  const auto pad = [&](const BoolMatrix& m) {
    if (width == n) return m;
    BoolMatrix out = BoolMatrix::square(width);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out.set(i, j, m.get(i, j));
    return out;
  };

  const AdjMatrix merged = adjacency(g);
  std::vector<BoolMatrix> by_label;
  if (cfg.windows.has(WindowKind::neighbor))
    for (std::size_t l = 0; l < cfg.n_edge_labels; ++l) by_label.push_back(pad(adjacency(g, static_cast<Label>(l))));
  const BoolMatrix reversed = pad(merged.transposed());
  std::vector<BoolMatrix> expanding;
  std::vector<BoolMatrix> reversed_expanding;
  if (cfg.windows.has(WindowKind::expanding) || cfg.windows.has(WindowKind::reversed_expanding)) {
    for (const AdjMatrix& w : window_sequence(merged, cfg.n_layers)) {
      expanding.push_back(pad(w));
      reversed_expanding.push_back(pad(w.transposed()));
    }
  }
  BoolMatrix global = BoolMatrix::square(width);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) global.set(i, j);

  HeadMaskSet set;
  set.heads = head_layout(cfg);
  set.valid.assign(width, false);
  std::fill(set.valid.begin(), set.valid.begin() + static_cast<std::ptrdiff_t>(n), true);
  set.masks.resize(cfg.n_layers);
  for (std::size_t layer = 0; layer < cfg.n_layers; ++layer) {
    auto& masks = set.masks[layer];
    masks.reserve(set.heads.size());
    for (const HeadSpec& h : set.heads) {
      switch (h.kind) {
        case WindowKind::neighbor:
          masks.push_back(by_label[static_cast<std::size_t>(h.edge_label)]);
          break;
        case WindowKind::reversed_neighbor:
          masks.push_back(reversed);
          break;
        case WindowKind::expanding:
          masks.push_back(expanding[layer]);
          break;
        case WindowKind::reversed_expanding:
          masks.push_back(reversed_expanding[layer]);
          break;
        case WindowKind::global:
          masks.push_back(global);
          break;
      }
    }
  }
  return set;
}

DropMask sample_head_dropout(const ModelConfig& cfg, Rng& rng, bool training) {
  DropMask drop{};
  if (!training || cfg.head_drop_p <= 0.0) return drop;
  for (bool& d : drop) d = bernoulli(rng, cfg.head_drop_p);
  return drop;
}

Tensor sample_identifiers(std::size_t n, std::size_t width, Rng& rng) {
  Tensor ids = Tensor::matrix(n, width);
  std::uint64_t bits = 0;
  std::size_t left = 0;
  for (double& v : ids.values()) {
    if (left == 0) {
      bits = rng();
      left = 64;
    }
    v = static_cast<double>(bits & 1u);
    bits >>= 1;
    --left;
  }
  return ids;
}

BoundParams bind(Tape& tape, const ModelParams& params, const ModelConfig& cfg) {
  BoundParams b;
  b.label_embedding = tape.parameter(params.label_embedding);
  for (const auto& layer : params.layers) {
    BoundParams::Layer bl;
    for (const auto& h : layer.heads) {
      bl.wq.push_back(tape.parameter(h.wq));
      bl.wk.push_back(tape.parameter(h.wk));
      bl.wv.push_back(tape.parameter(h.wv));
    }
    if (!layer.heads.empty()) {
      bl.wq_all = concat_last(bl.wq);
      bl.wk_all = concat_last(bl.wk);
      bl.wv_all = concat_last(bl.wv);
    }
    bl.inner_weight = tape.parameter(layer.inner.weight);
    bl.inner_gain = tape.parameter(layer.inner.gain);
    bl.inner_bias = tape.parameter(layer.inner.bias);
    bl.outer_weight = tape.parameter(layer.outer.weight);
    bl.outer_gain = tape.parameter(layer.outer.gain);
    bl.outer_bias = tape.parameter(layer.outer.bias);
    b.layers.push_back(std::move(bl));
  }
  b.w1 = tape.parameter(params.readout.w1);
  b.b1 = tape.parameter(params.readout.b1);
  b.w2 = tape.parameter(params.readout.w2);
  b.b2 = tape.parameter(params.readout.b2);
  (void)cfg;
  return b;
}

std::vector<Var> BoundParams::leaves() const {
  std::vector<Var> out{label_embedding};
  for (const Layer& l : layers) {
    for (std::size_t h = 0; h < l.wq.size(); ++h) {
      out.push_back(l.wq[h]);
      out.push_back(l.wk[h]);
      out.push_back(l.wv[h]);
    }
    for (const Var& v : {l.inner_weight, l.inner_gain, l.inner_bias, l.outer_weight, l.outer_gain, l.outer_bias})
      out.push_back(v);
  }
  for (const Var& v : {w1, b1, w2, b2}) out.push_back(v);
  return out;
}

Var initial_embeddings(Tape& tape, const Graph& g, const BoundParams& p, const ModelConfig& cfg,
                       const Tensor& identifiers) {
  std::vector<std::size_t> rows(g.size());
  for (NodeId v = 0; v < g.size(); ++v) {
    const Label label = g.node_label(v);
    if (label < 0 || static_cast<std::size_t>(label) >= cfg.n_node_labels) {
      throw ContractError("node " + std::to_string(v) + " has label " + std::to_string(label) + " outside the " +
                          std::to_string(cfg.n_node_labels) + " configured labels");
    }
    rows[v] = static_cast<std::size_t>(label);
  }
  const Var labels = gather_rows(p.label_embedding, rows);
  if (cfg.random_id_width == 0) return labels;
  if (identifiers.rank() != 2 || identifiers.rows() != g.size() || identifiers.cols() != cfg.random_id_width) {
    throw DimensionError("identifiers must be " + std::to_string(g.size()) + "x" +
                         std::to_string(cfg.random_id_width) + ", got " + to_string(identifiers.shape()));
  }
  const Var parts[] = {labels, tape.constant(identifiers)};
  return concat_last(parts);
}

Var attention_head(Var q, Var k, Var v, Var wq, Var wk, Var wv, const BoolMatrix& mask) {
  const Var qp = matmul(q, wq);
  const Var kp = matmul(k, wk);
  const double scale_by = 1.0 / std::sqrt(static_cast<double>(qp.value().cols()));
  const Var alpha = masked_softmax(scale(matmul_nt(qp, kp), scale_by), mask);
  return matmul(alpha, matmul(v, wv));
}

Var layer_forward(Var x, const HeadMaskSet& masks, std::size_t layer, const BoundParams& p, const ModelConfig& cfg,
                  const DropMask& drop) {
  Tape& tape = *x.tape();
  const auto& L = p.layers.at(layer);
  const std::size_t n = x.value().rows();
  const auto& heads = masks.heads;

  bool any_active = false;
  for (const HeadSpec& h : heads) any_active = any_active || !drop[static_cast<std::size_t>(h.kind)];

  std::vector<Var> parts{x};
  parts.reserve(heads.size() + 1);
  Var q_all, k_all, v_all;
  if (any_active) {
    q_all = matmul(x, L.wq_all);
    k_all = matmul(x, L.wk_all);
    v_all = matmul(x, L.wv_all);
  }
  const double scale_by = 1.0 / std::sqrt(static_cast<double>(cfg.d_qk));
  Var zeros;
  for (std::size_t h = 0; h < heads.size(); ++h) {
    if (drop[static_cast<std::size_t>(heads[h].kind)]) {
      if (!zeros.valid()) zeros = tape.constant(Tensor::matrix(n, cfg.d_v));
      parts.push_back(zeros);
      continue;
    }
    const Var qh = slice_cols(q_all, h * cfg.d_qk, cfg.d_qk);
    const Var kh = slice_cols(k_all, h * cfg.d_qk, cfg.d_qk);
    const Var vh = slice_cols(v_all, h * cfg.d_v, cfg.d_v);
    const Var alpha = masked_softmax(scale(matmul_nt(qh, kh), scale_by), masks.at(layer, h));
    parts.push_back(matmul(alpha, vh));
  }
  const Var joined = concat_last(parts);
  const Var hidden = relu(layer_norm(joined, L.inner_weight, L.inner_gain, L.inner_bias));
  const Var update = layer_norm(hidden, L.outer_weight, L.outer_gain, L.outer_bias);
  return relu(add(x, update));
}

Var readout(Var x, const std::vector<bool>& valid, const BoundParams& p) {
  const Var pooled = reduce_max_rows(x, valid);
  const Var hidden = relu(add_bias(matmul(pooled, p.w1), p.b1));
  return add_bias(matmul(hidden, p.w2), p.b2);
}

ForwardNoise sample_noise(const Graph& g, const ModelConfig& cfg, Rng& rng, bool training) {
  ForwardNoise noise;
  noise.identifiers = sample_identifiers(g.size(), cfg.random_id_width, rng);
  noise.drop = sample_head_dropout(cfg, rng, training);
  return noise;
}

Var forward(Tape& tape, const Graph& g, const HeadMaskSet& masks, const BoundParams& p, const ModelConfig& cfg,
            const ForwardNoise& noise) {
  if (masks.valid.size() != g.size()) throw ContractError("forward: masks were built for a different node count");
  Var x = initial_embeddings(tape, g, p, cfg, noise.identifiers);
  for (std::size_t layer = 0; layer < cfg.n_layers; ++layer) x = layer_forward(x, masks, layer, p, cfg, noise.drop);
  return readout(x, masks.valid, p);
}

Var forward(Tape& tape, const Graph& g, const BoundParams& p, const ModelConfig& cfg, const ForwardNoise& noise) {
  return forward(tape, g, build_head_masks(g, cfg), p, cfg, noise);
}

Tensor forward(const Graph& g, const ModelParams& params, const ModelConfig& cfg, const ForwardNoise& noise) {
  Tape tape;
  const BoundParams bound = bind(tape, params, cfg);
  return forward(tape, g, bound, cfg, noise).value();
}

Tensor forward(const Graph& g, const ModelParams& params, const ModelConfig& cfg, Rng& rng, bool training) {
  return forward(g, params, cfg, sample_noise(g, cfg, rng, training));
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(std::ostream& out, const ModelConfig& cfg, ModelParams& params) {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  for (const auto& [key, value] : config_entries(cfg)) out << "config " << key << ' ' << value << '\n';
  const auto named = params.named(cfg);
  out << "tensors " << named.size() << '\n';
  for (const auto& [name, t] : named) {
    out << "tensor " << name << ' ' << t->rows() << ' ' << t->cols() << '\n';
    for (std::size_t i = 0; i < t->size(); ++i) out << (i ? " " : "") << format_double((*t)[i]);
    out << '\n';
  }
  out << "end\n";
  if (!out) throw IoError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg, ModelParams& params) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save_checkpoint(out, cfg, params);
}

Checkpoint load_checkpoint(std::istream& in, const std::string& source) {
  std::size_t line_no = 0;
  std::string line;
  const auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "unexpected end of checkpoint");
    ++line_no;
    return line;
  };

  {
    std::istringstream head(next());
    std::string magic;
    int version = 0;
    if (!(head >> magic >> version) || magic != kCheckpointMagic)
      throw ParseError(source, line_no, "not an expgnn checkpoint");
    if (version != kCheckpointVersion)
      throw ParseError(source, line_no, "unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ck;
  std::size_t tensor_count = 0;
  while (true) {
    std::istringstream rec(next());
    std::string kind;
    rec >> kind;
    if (kind == "config") {
      std::string key, value;
      if (!(rec >> key >> value)) throw ParseError(source, line_no, "malformed config line");
      try {
        if (!set_config_entry(ck.config, key, value))
          throw ParseError(source, line_no, "unknown config key '" + key + "'");
      } catch (const ContractError& e) {
        throw ParseError(source, line_no, e.what());
      }
    } else if (kind == "tensors") {
      if (!(rec >> tensor_count)) throw ParseError(source, line_no, "malformed tensor count");
      break;
    } else {
      throw ParseError(source, line_no, "expected a config or tensors line");
    }
  }
  try {
    ck.config.validate();
  } catch (const ContractError& e) {
    throw ParseError(source, line_no, e.what());
  }

  // Shapes come from the config; values are filled by name.
  Rng unused(0);
  ck.params = ModelParams::initialize(ck.config, unused);
  auto named = ck.params.named(ck.config);
  if (tensor_count != named.size()) {
    throw ParseError(source, line_no,
                     "config implies " + std::to_string(named.size()) + " tensors, file has " +
                         std::to_string(tensor_count));
  }
  std::map<std::string, Tensor*> by_name;
  for (const auto& [name, t] : named) by_name[name] = t;

  for (std::size_t k = 0; k < tensor_count; ++k) {
    std::istringstream rec(next());
    std::string kind, name;
    std::size_t rows = 0, cols = 0;
    if (!(rec >> kind >> name >> rows >> cols) || kind != "tensor")
      throw ParseError(source, line_no, "malformed tensor header");
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ParseError(source, line_no, "unexpected or repeated tensor '" + name + "'");
    Tensor& t = *it->second;
    if (t.rows() != rows || t.cols() != cols) {
      throw ParseError(source, line_no,
                       "tensor '" + name + "' is " + std::to_string(rows) + "x" + std::to_string(cols) +
                           ", config implies " + to_string(t.shape()));
    }
    by_name.erase(it);
    const std::string& values = next();
    const char* pos = values.data();
    const char* end = values.data() + values.size();
    for (std::size_t i = 0; i < t.size(); ++i) {
      while (pos < end && *pos == ' ') ++pos;
      const auto [stop, ec] = std::from_chars(pos, end, t[i]);
      if (ec != std::errc()) throw ParseError(source, line_no, "bad value in tensor '" + name + "'");
      pos = stop;
    }
    while (pos < end && *pos == ' ') ++pos;
    if (pos != end) throw ParseError(source, line_no, "extra values in tensor '" + name + "'");
  }
  if (next() != "end") throw ParseError(source, line_no, "expected 'end'");
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_checkpoint(in, path.string());
}

}  // namespace expgnn
