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

#include "iefs/adam.hpp"

#include <cmath>

#include "iefs/errors.hpp"

namespace iefs {

AdamState AdamState::initial(const ParamMap& params) {
  AdamState s;
  for (const auto& [name, t] : params) {
    s.m.emplace(name, Tensor::zeros(t.shape()));
    s.v.emplace(name, Tensor::zeros(t.shape()));
  }
  return s;
}

void adam_step(ParamMap& params, const ParamMap& grads, AdamState& state, const AdamSettings& s) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (auto& [name, theta] : params) {
    auto g = grads.find(name);
    auto m = state.m.find(name);
    auto v = state.v.find(name);
    if (g == grads.end() || m == state.m.end() || v == state.v.end()) {
      throw DimensionError("adam_step: missing gradient or moments for " + name);
    }
    if (g->second.shape() != theta.shape() || m->second.shape() != theta.shape()) {
      throw DimensionError("adam_step: shape mismatch for " + name);
    }
    auto th = theta.values().array();
    const auto ga = g->second.values().array();
    auto ma = m->second.values().array();
    auto va = v->second.values().array();
    th *= 1.0 - s.lr * s.weight_decay;
    ma = s.beta1 * ma + (1.0 - s.beta1) * ga;
    va = s.beta2 * va + (1.0 - s.beta2) * ga.square();
    th -= s.lr * (ma / c1) / ((va / c2).sqrt() + s.eps);
  }
}

}  // namespace iefs
