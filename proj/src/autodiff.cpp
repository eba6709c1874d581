// Copyright 2026 The IEFS-GMB Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "iefs/autodiff.hpp"

#include "iefs/errors.hpp"

namespace iefs {

const Tensor& Var::value() const {
  if (!tape_) throw UsageError("use of an unbound Var");
  return tape_->nodes_.at(id_).value;
}

bool Var::requires_grad() const { return tape_ && tape_->nodes_.at(id_).requires_grad; }

const Eigen::VectorXd& BackwardContext::grad_output() const { return tape_.nodes_[node_].grad; }

const Tensor& BackwardContext::output() const { return tape_.nodes_[node_].value; }

const Tensor& BackwardContext::input(std::size_t k) const {
  return tape_.nodes_[tape_.nodes_[node_].inputs.at(k)].value;
}

bool BackwardContext::needs_grad(std::size_t k) const {
  return tape_.nodes_[tape_.nodes_[node_].inputs.at(k)].requires_grad;
}

Eigen::VectorXd& BackwardContext::input_grad(std::size_t k) {
  auto& in = tape_.nodes_[tape_.nodes_[node_].inputs.at(k)];
  if (!in.has_grad) {
    in.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(in.value.size()));
    in.has_grad = true;
  }
  return in.grad;
}

Tape::Node& Tape::node(Var v) {
  if (v.tape_ != this) throw UsageError("Var belongs to a different tape");
  return nodes_.at(v.id_);
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape_ != this) throw UsageError("Var belongs to a different tape");
  return nodes_.at(v.id_);
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  if (closed_) throw UsageError("cannot record on a closed tape");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  if (closed_) throw UsageError("cannot record on a closed tape");
  Node n;
  n.value = std::move(value);
  n.is_leaf = false;
  for (const auto& in : inputs) {
    if (in.tape_ != this) throw UsageError("operation mixes Vars from different tapes");
    n.inputs.push_back(in.id_);
    n.requires_grad = n.requires_grad || nodes_[in.id_].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::capture(Var v) { node(v).captured = true; }

bool Tape::captured(Var v) const { return node(v).captured; }

void Tape::zero_grad() {
  for (auto& n : nodes_) {
    n.grad.resize(0);
    n.has_grad = false;
  }
}

void Tape::backward(Var loss) {
  if (!closed_) throw UsageError("backward requires a closed tape");
  auto& root = node(loss);
  if (root.value.size() != 1) {
    throw UsageError("backward expects a scalar loss, got shape " + to_string(root.value.shape()));
  }
  zero_grad();
  if (!root.requires_grad) return;
  root.grad = Eigen::VectorXd::Ones(1);
  root.has_grad = true;

  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.has_grad || !n.requires_grad || !n.backward) continue;
    BackwardContext ctx(*this, i);
    n.backward(ctx);
    if (!n.captured) {
      n.grad.resize(0);
      n.has_grad = false;
    }
  }
  for (auto& n : nodes_) {
    if (n.has_grad && !n.captured && !(n.is_leaf && n.requires_grad)) {
      n.grad.resize(0);
      n.has_grad = false;
    }
  }
}

bool Tape::has_grad(Var v) const { return node(v).has_grad; }

Tensor Tape::grad(Var v) const {
  const auto& n = node(v);
  if (!n.has_grad) {
    // A requires_grad leaf that the loss never touched has a zero gradient.
    if (n.is_leaf && n.requires_grad) return Tensor::zeros(n.value.shape());
    throw UsageError("no gradient retained for node " + std::to_string(v.id_));
  }
  return Tensor(n.value.shape(), n.grad);
}

}  // namespace iefs
