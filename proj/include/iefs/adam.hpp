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

#include <cstdint>

#include "iefs/encoder.hpp"

namespace iefs {

struct AdamSettings {
  double lr = 1e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments per parameter name, plus the step count.
struct AdamState {
  ParamMap m;
  ParamMap v;
  std::int64_t step = 0;

  static AdamState initial(const ParamMap& params);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam step with decoupled weight decay
/// (theta <- theta - lr * wd * theta, then the Adam update). Increments
/// state.step first, so the first call uses t = 1.
void adam_step(ParamMap& params, const ParamMap& grads, AdamState& state, const AdamSettings& s);

}  // namespace iefs
