#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "expgnn/graph.hpp"
#include "expgnn/random.hpp"
#include "expgnn/tape.hpp"
#include "expgnn/tensor.hpp"

namespace expgnn {

enum class WindowKind : std::size_t { neighbor, reversed_neighbor, expanding, reversed_expanding, global };
inline constexpr std::size_t kWindowKinds = 5;

std::string_view to_string(WindowKind kind);

/// Which head types a model instance carries. Ablations switch types off.
struct WindowSet {
  std::array<bool, kWindowKinds> enabled{true, true, true, true, true};

  bool has(WindowKind kind) const { return enabled[static_cast<std::size_t>(kind)]; }
  void set(WindowKind kind, bool on) { enabled[static_cast<std::size_t>(kind)] = on; }

  static WindowSet all() { return {}; }
  /// Without the expanding and reversed-expanding heads.
  static WindowSet without_expanding();

  friend bool operator==(const WindowSet&, const WindowSet&) = default;
};

struct ModelConfig {
  std::size_t n_layers = 3;
  std::size_t d_model = 128;
  std::size_t d_qk = 32;
  std::size_t d_v = 32;
  std::size_t heads_per_type = 3;
  double head_drop_p = 0.1;
  std::size_t n_edge_labels = 1;
  std::size_t n_node_labels = 1;
  std::size_t n_classes = 2;
  /// Width of the random 0/1 part of each initial embedding; 0 disables it.
  std::size_t random_id_width = 64;
  WindowSet windows;

  std::size_t label_width() const { return d_model - random_id_width; }
  std::size_t head_count() const;
  std::size_t head_output_width() const { return head_count() * d_v; }

  /// Throws ContractError on inconsistent fields.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Config as ordered key/value text pairs, the form used by checkpoints and
/// the command line.
std::vector<std::pair<std::string, std::string>> config_entries(const ModelConfig& cfg);
/// Sets one entry from text. Returns false for an unknown key; throws
/// ContractError for a malformed value.
bool set_config_entry(ModelConfig& cfg, std::string_view key, std::string_view value);

struct HeadSpec {
  WindowKind kind = WindowKind::global;
  /// Edge label for neighbor heads, 0 otherwise.
  Label edge_label = 0;
  std::size_t replica = 0;

  std::string name() const;
  friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

/// Heads in canonical order: by kind, then replica, then edge label.
std::vector<HeadSpec> head_layout(const ModelConfig& cfg);

struct NormParams {
  Tensor weight;  // d_in x H
  Tensor gain;    // 1 x H
  Tensor bias;    // 1 x H

  friend bool operator==(const NormParams&, const NormParams&) = default;
};

struct HeadParams {
  Tensor wq;  // d_model x d_qk
  Tensor wk;  // d_model x d_qk
  Tensor wv;  // d_model x d_v

  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

struct LayerParams {
  std::vector<HeadParams> heads;
  NormParams inner;  // (d_model + head output width) -> d_model
  NormParams outer;  // d_model -> d_model

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct ReadoutParams {
  Tensor w1;  // d_model x d_model
  Tensor b1;  // 1 x d_model
  Tensor w2;  // d_model x n_classes
  Tensor b2;  // 1 x n_classes

  friend bool operator==(const ReadoutParams&, const ReadoutParams&) = default;
};

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

struct ModelParams {
  Tensor label_embedding;  // n_node_labels x label_width
  std::vector<LayerParams> layers;
  ReadoutParams readout;

  /// Glorot-uniform matrices, unit gains, zero biases.
  static ModelParams initialize(const ModelConfig& cfg, Rng& rng);

  /// Every learnable tensor with a stable name, in canonical order.
  std::vector<NamedTensor> named(const ModelConfig& cfg);
  std::vector<const Tensor*> tensors() const;
  std::size_t parameter_count() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Attention masks per layer and head, plus the validity of each row.
struct HeadMaskSet {
  std::vector<HeadSpec> heads;
  /// masks[layer][head]
  std::vector<std::vector<BoolMatrix>> masks;
  std::vector<bool> valid;

  const BoolMatrix& at(std::size_t layer, std::size_t head) const { return masks.at(layer).at(head); }
};

/// Masks for g padded to `padded_n` rows (0 means g.size()). Padding rows
/// and columns are excluded from every mask.
HeadMaskSet build_head_masks(const Graph& g, const ModelConfig& cfg, std::size_t padded_n = 0);

/// Dropped head types for one forward pass, indexed by WindowKind.
using DropMask = std::array<bool, kWindowKinds>;

/// Each head type is dropped with probability head_drop_p when training.
DropMask sample_head_dropout(const ModelConfig& cfg, Rng& rng, bool training);

/// n x width matrix of independent fair 0/1 draws.
Tensor sample_identifiers(std::size_t n, std::size_t width, Rng& rng);

/// Parameters placed on a tape.
struct BoundParams {
  Var label_embedding;
  struct Layer {
    std::vector<Var> wq, wk, wv;
    /// Per-head projections side by side, so one product serves all heads.
    Var wq_all, wk_all, wv_all;
    Var inner_weight, inner_gain, inner_bias;
    Var outer_weight, outer_gain, outer_bias;
  };
  std::vector<Layer> layers;
  Var w1, b1, w2, b2;

  /// Parameter leaves in the order of ModelParams::tensors().
  std::vector<Var> leaves() const;
};

/// Registers every tensor of `params` as a differentiable parameter. `params`
/// must outlive the tape.
BoundParams bind(Tape& tape, const ModelParams& params, const ModelConfig& cfg);

/// Label embedding of each node next to its identifier row.
/// `identifiers` is n x random_id_width and enters the tape as a constant.
Var initial_embeddings(Tape& tape, const Graph& g, const BoundParams& p, const ModelConfig& cfg,
                       const Tensor& identifiers);

/// alpha (x W_V) with alpha = maskedSoftmax(M, (x W_Q)(x W_K)^T / sqrt(d_qk)).
Var attention_head(Var q, Var k, Var v, Var wq, Var wk, Var wv, const BoolMatrix& mask);

/// ReLU(x + FNN(x || heads)), dropped head types contributing zero blocks.
Var layer_forward(Var x, const HeadMaskSet& masks, std::size_t layer, const BoundParams& p, const ModelConfig& cfg,
                  const DropMask& drop);

/// Column max over valid rows, then affine, ReLU, affine. Returns 1 x n_classes.
Var readout(Var x, const std::vector<bool>& valid, const BoundParams& p);

/// Randomness consumed by one forward pass.
struct ForwardNoise {
  Tensor identifiers;
  DropMask drop{};
};

ForwardNoise sample_noise(const Graph& g, const ModelConfig& cfg, Rng& rng, bool training);

/// Full network on a tape; returns 1 x n_classes logits.
Var forward(Tape& tape, const Graph& g, const BoundParams& p, const ModelConfig& cfg, const ForwardNoise& noise);
Var forward(Tape& tape, const Graph& g, const HeadMaskSet& masks, const BoundParams& p, const ModelConfig& cfg,
            const ForwardNoise& noise);

/// Logits without keeping a tape around.
Tensor forward(const Graph& g, const ModelParams& params, const ModelConfig& cfg, const ForwardNoise& noise);
Tensor forward(const Graph& g, const ModelParams& params, const ModelConfig& cfg, Rng& rng, bool training);

// Checkpoints: a text header, the resolved config, then one record per named
// tensor with values written in shortest round-trip form.

void save_checkpoint(std::ostream& out, const ModelConfig& cfg, ModelParams& params);
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg, ModelParams& params);

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
};

Checkpoint load_checkpoint(std::istream& in, const std::string& source = "<stream>");
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace expgnn
