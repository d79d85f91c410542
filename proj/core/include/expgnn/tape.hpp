#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include "expgnn/tensor.hpp"

namespace expgnn {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while
/// its tape is alive.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// What a backward rule sees. `grads[i]` is null when input i does not need
/// a gradient; otherwise the rule adds its contribution into it.
struct BackwardArgs {
  const Tensor& output;
  const Tensor& grad_output;
  std::span<const Tensor* const> inputs;
  std::span<Tensor* const> grads;
};

using BackwardFn = std::function<void(const BackwardArgs&)>;

/// Gradients of a scalar w.r.t. every differentiable leaf of a tape.
class Gradients {
 public:
  /// Gradient for a leaf; zeros if the loss does not depend on it.
  const Tensor& of(Var leaf) const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<Tensor> grads_;
};

/// Append-only record of operations for reverse-mode differentiation.
/// Node ids are assigned in creation order, which is a topological order,
/// so backward simply walks ids downward.
class Tape {
 public:
  Tape() { nodes_.reserve(256); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Non-differentiable input.
  Var constant(Tensor value);
  /// Differentiable leaf owning its value.
  Var leaf(Tensor value);
  /// Differentiable leaf borrowing `value`, which must outlive the tape.
  Var parameter(const Tensor& value);

  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
  }

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  bool is_leaf(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep from a 1-element loss.
  Gradients backward(Var loss) const;

  /// Smallest distance of any recorded input to a non-differentiable point
  /// (ReLU kink, max-readout switch). Finite-difference checks use it to
  /// reject probes that straddle a kink.
  double kink_margin() const noexcept { return kink_margin_; }
  void note_kink_margin(double margin) noexcept {
    if (margin < kink_margin_) kink_margin_ = margin;
  }

 private:
  struct Node {
    Tensor owned;
    const Tensor* borrowed = nullptr;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    bool leaf = false;

    const Tensor& value() const { return borrowed ? *borrowed : owned; }
  };

  void check_owner(Var v) const;

  std::vector<Node> nodes_;
  double kink_margin_ = std::numeric_limits<double>::infinity();
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

}  // namespace expgnn
