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

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "iefs/tensor.hpp"

namespace iefs {

enum class Mode { train, eval };

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid as long as the
/// tape is alive.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// What a backward rule sees: the incoming gradient of its output and
/// accumulation slots for each input.
class BackwardContext {
 public:
  const Eigen::VectorXd& grad_output() const;
  const Tensor& output() const;
  const Tensor& input(std::size_t k) const;
  bool needs_grad(std::size_t k) const;
  /// Gradient slot for input k, zero-initialised on first access. Add into it.
  Eigen::VectorXd& input_grad(std::size_t k);

 private:
  friend class Tape;
  BackwardContext(Tape& tape, std::size_t node) : tape_(tape), node_(node) {}
  Tape& tape_;
  std::size_t node_;
};

using BackwardFn = std::function<void(BackwardContext&)>;

/// Linear record of operations for reverse-mode differentiation.
///
/// Nodes are appended in execution order, so inputs always precede their
/// consumers. backward() sweeps the nodes once in reverse. After the sweep
/// gradients are kept for leaves that require them and for nodes in the
/// capture set; intermediate gradients are released.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = false);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

  /// Mark a node whose gradient must survive backward().
  void capture(Var v);
  bool captured(Var v) const;

  void close() { closed_ = true; }
  bool closed() const { return closed_; }

  /// Reverse sweep from a scalar loss. Gradients from any previous sweep are
  /// cleared first, so repeated calls give identical results.
  void backward(Var loss);
  void zero_grad();

  bool has_grad(Var v) const;
  Tensor grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;
  friend class BackwardContext;

  struct Node {
    Tensor value;
    Eigen::VectorXd grad;  // empty until touched
    bool has_grad = false;
    bool requires_grad = false;
    bool is_leaf = true;
    bool captured = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  Node& node(Var v);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  bool closed_ = false;
};

}  // namespace iefs
