#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "expgnn/tape.hpp"
#include "expgnn/tensor.hpp"

namespace expgnn {

/// Lower clamp for the per-row standard deviation in layer_norm.
inline constexpr double kNormEpsilon = 1e-6;

// All operations below take and return matrices (rank-2 tensors) recorded
// on the tape that owns their inputs.

Var matmul(Var a, Var b);
/// a * b^T without materializing the transpose.
Var matmul_nt(Var a, Var b);
Var transpose(Var a);

Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

/// x + bias, with a 1xd bias repeated over the rows of x.
Var add_bias(Var x, Var bias);
/// x .* gain, with a 1xd gain repeated over the rows of x.
Var mul_gain(Var x, Var gain);

/// max(0, x). The subgradient at 0 is 0.
Var relu(Var x);

/// Row-wise softmax restricted to positions where `mask` is true.
/// Masked positions are exactly 0; rows with no allowed position are all 0.
Var masked_softmax(Var x, const BoolMatrix& mask);

/// (a - mean) / std per row, population std clamped below at `eps`.
Var standardize_rows(Var a, double eps = kNormEpsilon);

/// Normalized dense layer: gain / sigma .* (x W - mu) + bias.
/// `weight` is d_in x H, `gain` and `bias` are 1 x H.
Var layer_norm(Var x, Var weight, Var gain, Var bias);

/// Feature-wise concatenation in argument order; all inputs share rows.
Var concat_last(std::span<const Var> xs);

/// Per-column maximum over rows with valid[r] set, as a 1 x d row.
/// Gradient goes to the first row attaining the maximum.
Var reduce_max_rows(Var x, const std::vector<bool>& valid);

/// Rows of `table` picked by `indices` (an embedding lookup).
Var gather_rows(Var table, std::span<const std::size_t> indices);

/// Sum of all entries as a 1x1 tensor.
Var sum(Var x);

/// Columns [begin, begin + count) of x.
Var slice_cols(Var x, std::size_t begin, std::size_t count);

/// -log softmax(logits)[target] for a 1 x C row of logits, stabilized by
/// the row maximum.
Var cross_entropy(Var logits, std::size_t target);

}  // namespace expgnn
