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
#include <cstdint>
#include <optional>
#include <ostream>

#include "iefs/autodiff.hpp"
#include "iefs/gmb.hpp"
#include "iefs/ops.hpp"

namespace iefs {

/// Per-insertion-layer state of the entropy feature-selection module.
struct FsState {
  Activation kind = Activation::softmax;
  BatchNormState bn;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  double eps_h = 1e-12;
  bool warmup_done = false;
  std::optional<Tensor> last_lambda;  // [S], from the latest active forward

  static FsState initial(std::size_t channels, Activation kind, double bn_eps = 1e-5,
                         double bn_momentum = 0.1);
};

/// Mean over the batch axis: [B, C, S] -> [C, S].
Tensor batch_pool(const Tensor& h);
Var batch_pool(Var h);

/// v[i,:,r] = BN(alpha (.) h[i,:,r]), alpha a constant [C] weight and BN
/// per channel over batch and positions.
Var heat_map(Var h, const Tensor& alpha, Var gamma, Var beta, FsState& fs, Mode mode);

/// Channel probabilities per location (axis 0 of [C] or [C, S]).
Var probability(Var v, Activation kind);

/// Applies entropy-weighted feature selection to h [B, C, S]:
///   v = heat_map(h, alpha), lambda = 1 - H / max H over locations, with the
///   entropies taken on the batch-pooled heat map, and
///   h_final[i,:,r] = h[i,:,r] + lambda_r * v[i,:,r].
///
/// Train mode uses `alpha->alpha` and is the identity when `alpha` is null
/// (bank still warming up). Eval mode uses `alpha->frozen_alpha` and throws
/// ConfigError without one. Alpha is a constant: no gradient reaches it.
Var fs_forward(Var h, const AlphaWeights* alpha, Var gamma, Var beta, FsState& fs, Mode mode);

/// Trainable batch-norm affine parameters of the module.
inline constexpr const char* kFsGammaName = "fs.bn.gamma";
inline constexpr const char* kFsBetaName = "fs.bn.beta";

struct AttributionMap {
  Tensor lambda_per_location;     // [S]
  Tensor upsampled_per_timestamp; // [t]
  std::uint32_t clip_id = 0;
  std::size_t layer = 0;
};

/// Nearest-neighbour expansion of the latest lambda to input resolution:
/// timestamp tau takes lambda[min(tau / stride_product, S - 1)].
AttributionMap export_attribution(const FsState& fs, std::size_t timestamps,
                                  std::size_t stride_product, std::uint32_t clip_id,
                                  std::size_t layer);

/// `timestamp,weight` header then one row per sample, 9 significant digits.
void write_attribution_csv(const AttributionMap& map, std::ostream& out);

}  // namespace iefs
