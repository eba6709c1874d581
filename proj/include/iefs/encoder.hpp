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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "iefs/autodiff.hpp"
#include "iefs/ops.hpp"

namespace iefs {

/// conv(kernel_len, stride) -> batch norm -> ReLU -> avg pool(pool_len).
struct BlockSpec {
  std::size_t out_channels = 32;
  std::size_t kernel_len = 7;
  std::size_t stride = 1;
  std::size_t pool_len = 2;

  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// (channels, temporal length) of a feature map.
struct FeatureShape {
  std::size_t channels;
  std::size_t length;
};

struct EncoderConfig {
  std::size_t in_channels = 16;
  std::size_t clip_len = 250;
  std::vector<BlockSpec> blocks{{32, 7, 1, 2}, {64, 5, 1, 2}};
  std::size_t insertion_layer = 0;
  std::size_t num_classes = 2;
  Activation activation_kind = Activation::softmax;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  /// Throws ConfigError naming the first offending block.
  void validate() const;
  /// Output shape of every block, in order.
  std::vector<FeatureShape> block_shapes() const;
  FeatureShape feature_shape() const { return block_shapes().at(insertion_layer); }
  /// Length of the flattened final feature map fed to the linear head.
  std::size_t head_inputs() const;
  /// Cumulative temporal downsampling (stride * pool) up to and including `layer`.
  std::size_t stride_product(std::size_t layer) const;
};

using ParamMap = std::map<std::string, Tensor>;
using ParamVars = std::map<std::string, Var>;

/// Running batch-norm statistics of each block.
struct EncoderState {
  std::vector<BatchNormState> bn;

  static EncoderState initial(const EncoderConfig& config);
};

/// Kaiming-uniform conv weights (bound sqrt(6 / fan_in)), unit BN scale and
/// zero shift, uniform(+-1/sqrt(fan_in)) linear weight with zero bias.
/// Deterministic in (config, seed).
ParamMap build_encoder(const EncoderConfig& config, std::uint64_t seed);

/// Record every parameter as a leaf on `tape`.
ParamVars bind_params(Tape& tape, const ParamMap& params, bool requires_grad);

/// Maps the insertion-layer features h_l to the features passed on.
using FeatureHook = std::function<Var(Var)>;

struct ForwardResult {
  Var logits;    // [B, num_classes]
  Var features;  // h_l, [B, C_l, S_l]; captured on the tape
};

ForwardResult encoder_forward(const ParamVars& params, const EncoderConfig& config,
                              EncoderState& state, Var x, Mode mode,
                              const FeatureHook* hook = nullptr);

/// The part of the network after the insertion layer: remaining blocks,
/// flatten and the linear head.
Var encoder_tail(const ParamVars& params, const EncoderConfig& config, EncoderState& state,
                 Var features, Mode mode);

}  // namespace iefs
