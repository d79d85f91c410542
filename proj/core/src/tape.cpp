#include "expgnn/tape.hpp"

#include <string>

#include "expgnn/errors.hpp"

namespace expgnn {

const Tensor& Gradients::of(Var leaf) const {
  if (leaf.tape() != tape_ || leaf.id() >= grads_.size()) {
    throw ContractError("Gradients::of: variable belongs to another tape");
  }
  if (!tape_->is_leaf(leaf)) throw ContractError("Gradients::of: only leaf gradients are kept");
  return grads_[leaf.id()];
}

void Tape::check_owner(Var v) const {
  if (v.tape() != this || v.id() >= nodes_.size()) throw ContractError("variable belongs to another tape");
}

Var Tape::constant(Tensor value) {
  Node node;
  node.owned = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor value) {
  Node node;
  node.owned = std::move(value);
  node.requires_grad = true;
  node.leaf = true;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const Tensor& value) {
  Node node;
  node.borrowed = &value;
  node.requires_grad = true;
  node.leaf = true;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node node;
  node.owned = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    check_owner(in);
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(Var v) const {
  check_owner(v);
  return nodes_[v.id()].value();
}

bool Tape::requires_grad(Var v) const {
  check_owner(v);
  return nodes_[v.id()].requires_grad;
}

bool Tape::is_leaf(Var v) const {
  check_owner(v);
  return nodes_[v.id()].leaf;
}

Gradients Tape::backward(Var loss) const {
  check_owner(loss);
  const Tensor& loss_value = nodes_[loss.id()].value();
  if (loss_value.size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " + to_string(loss_value.shape()));
  }

  std::vector<Tensor> grads(nodes_.size());
  std::vector<const Tensor*> in_values;
  std::vector<Tensor*> in_grads;

  if (nodes_[loss.id()].requires_grad) grads[loss.id()] = Tensor(loss_value.shape(), 1.0);

  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (node.leaf || !node.backward || grads[id].empty()) continue;

    in_values.clear();
    in_grads.clear();
    for (std::size_t in : node.inputs) {
      const Node& src = nodes_[in];
      in_values.push_back(&src.value());
      if (src.requires_grad) {
        if (grads[in].shape() != src.value().shape()) grads[in] = zeros_like(src.value());
        in_grads.push_back(&grads[in]);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    node.backward(BackwardArgs{node.value(), grads[id], in_values, in_grads});
    grads[id] = Tensor();
  }

  Gradients out;
  out.tape_ = this;
  out.grads_.resize(nodes_.size());
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (!nodes_[id].leaf) continue;
    out.grads_[id] = grads[id].shape() == nodes_[id].value().shape() ? std::move(grads[id])
                                                                     : zeros_like(nodes_[id].value());
  }
  return out;
}

}  // namespace expgnn
