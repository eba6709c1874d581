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

// Shared helpers for the test programs: random tensors and a central
// finite-difference gradient check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "iefs/autodiff.hpp"
#include "iefs/ops.hpp"
#include "iefs/rng.hpp"
#include "iefs/tensor.hpp"

namespace iefs::testing {

inline Tensor random_tensor(Rng& rng, const Shape& shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

inline Tensor random_normal(Rng& rng, const Shape& shape, double sigma = 1.0) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = sigma * rng.normal();
  return t;
}

/// Scalar function of a list of leaves, built on the given tape.
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Reduces any output to a scalar through fixed random weights so every
/// Jacobian entry contributes.
inline Var project(Var out, const Tensor& weights) {
  Var w = out.tape().leaf(weights);
  return sum(mul(out, w));
}

inline double evaluate_fn(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& t : inputs) leaves.push_back(tape.leaf(t, false));
  return f(tape, leaves).value()[0];
}

/// Largest relative error, over all inputs, between the reverse-mode
/// gradient and central differences. Each input is compared as a whole:
/// |g - n|_2 / max(|g|_2, |n|_2, floor).
inline double grad_check(const ScalarFn& f, const std::vector<Tensor>& inputs, double step = 1e-5,
                         double floor = 1e-8) {
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& t : inputs) leaves.push_back(tape.leaf(t, true));
  Var loss = f(tape, leaves);
  tape.close();
  tape.backward(loss);

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = tape.grad(leaves[k]);
    Tensor numeric(inputs[k].shape());
    std::vector<Tensor> probe = inputs;
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x = inputs[k][i];
      probe[k][i] = x + step;
      const double up = evaluate_fn(f, probe);
      probe[k][i] = x - step;
      const double down = evaluate_fn(f, probe);
      probe[k][i] = x;
      numeric[i] = (up - down) / (2.0 * step);
    }
    const double diff = (analytic.values() - numeric.values()).norm();
    const double scale = std::max({analytic.values().norm(), numeric.values().norm(), floor});
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

}  // namespace iefs::testing
