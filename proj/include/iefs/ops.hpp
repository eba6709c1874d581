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
#include <span>
#include <vector>

#include "iefs/autodiff.hpp"

// Differentiable operations on Tape values. Every function records one node
// and returns its handle; shapes are checked eagerly and mismatches raise
// DimensionError naming both operands.
//
// Broadcasting in add/mul covers two cases only: a single-element right
// operand, or a right operand whose shape is a trailing suffix of the left
// one (e.g. a [N] bias over [M,N]). Per-channel scaling of [B,C,...] by [C]
// goes through mul_channel.

namespace iefs {

/// Probability map used by the feature-selection entropy.
enum class Activation { softmax, sigmoid };

/// Per-channel running statistics of a batch-norm layer.
struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;

  static BatchNormState initial(std::size_t channels) {
    return {Tensor::zeros({channels}), Tensor::full({channels}, 1.0)};
  }
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var x);
Var sigmoid(Var x);
Var softmax(Var x, std::size_t axis);

/// Mean over the listed axes; the reduced axes are dropped ([1] if all are).
Var mean(Var x, const std::vector<std::size_t>& axes);
Var sum(Var x);
Var reshape(Var x, Shape shape);

/// y[b,c,...] = x[b,c,...] * factors[c].
Var mul_channel(Var x, Var factors);

/// Cross-correlation over the last axis: x [B,Cin,T], w [Cout,Cin,k].
Var conv1d(Var x, Var w, std::size_t stride, std::size_t padding);

/// Non-overlapping average pooling over the last axis; trailing samples that
/// do not fill a window are dropped.
Var avg_pool1d(Var x, std::size_t pool);

/// Per-channel batch normalisation of x [B,C] or [B,C,S]. Train mode
/// normalises with batch statistics (biased variance) and blends the running
/// statistics with weight `momentum` (unbiased variance); eval mode uses the
/// running statistics and leaves them untouched.
Var batchnorm(Var x, Var gamma, Var beta, BatchNormState& running, Mode mode, double eps,
              double momentum);

/// Mean over the batch of logsumexp(z_i) - z_i[label_i].
Var cross_entropy_logits(Var logits, std::span<const int> labels);

/// Entropy in nats along `axis` (axis removed from the result). Softmax kind
/// is Shannon entropy with 0 log 0 = 0; sigmoid kind sums the binary
/// entropies of independent per-element probabilities.
Var entropy(Var p, std::size_t axis, Activation kind);

/// lambda_r = 1 - H_r / max(H). Falls back to all ones (no gradient) when
/// max(H) < eps_h. Requires H >= 0.
Var lambda_weights(Var entropies, double eps_h);

}  // namespace iefs
