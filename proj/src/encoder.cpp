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

#include "iefs/encoder.hpp"

#include <cmath>

#include "iefs/errors.hpp"
#include "iefs/rng.hpp"

namespace iefs {

namespace {

std::string block_name(std::size_t i) { return "block" + std::to_string(i); }

Var run_block(const ParamVars& params, const EncoderConfig& config, EncoderState& state,
              std::size_t i, Var x, Mode mode) {
  const auto& spec = config.blocks[i];
  const std::string name = block_name(i);
  Var y = conv1d(x, params.at(name + ".conv.weight"), spec.stride, 0);
  y = batchnorm(y, params.at(name + ".bn.gamma"), params.at(name + ".bn.beta"), state.bn.at(i),
                mode, config.bn_eps, config.bn_momentum);
  y = relu(y);
  return avg_pool1d(y, spec.pool_len);
}

}  // namespace

void EncoderConfig::validate() const {
  if (in_channels == 0 || clip_len == 0) throw ConfigError("encoder input dimensions must be positive");
  if (blocks.empty()) throw ConfigError("encoder needs at least one block");
  if (insertion_layer >= blocks.size()) {
    throw ConfigError("insertion_layer " + std::to_string(insertion_layer) + " must be below block count " +
                      std::to_string(blocks.size()));
  }
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (!(bn_eps > 0.0)) throw ConfigError("bn_eps must be positive");
  if (!(bn_momentum >= 0.0 && bn_momentum <= 1.0)) throw ConfigError("bn_momentum must lie in [0, 1]");
  std::size_t len = clip_len;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::string where = "block " + std::to_string(i) + ": ";
    if (b.out_channels < 2) throw ConfigError(where + "out_channels must be at least 2");
    if (b.kernel_len == 0 || b.stride == 0 || b.pool_len == 0) {
      throw ConfigError(where + "kernel, stride and pool lengths must be positive");
    }
    if (b.kernel_len > len) {
      throw ConfigError(where + "kernel " + std::to_string(b.kernel_len) + " exceeds temporal length " +
                        std::to_string(len));
    }
    len = (len - b.kernel_len) / b.stride + 1;
    if (b.pool_len > len) {
      throw ConfigError(where + "pool " + std::to_string(b.pool_len) + " exceeds temporal length " +
                        std::to_string(len));
    }
    len /= b.pool_len;
  }
}

std::vector<FeatureShape> EncoderConfig::block_shapes() const {
  validate();
  std::vector<FeatureShape> shapes;
  std::size_t len = clip_len;
  for (const auto& b : blocks) {
    len = ((len - b.kernel_len) / b.stride + 1) / b.pool_len;
    shapes.push_back({b.out_channels, len});
  }
  return shapes;
}

std::size_t EncoderConfig::head_inputs() const {
  const auto last = block_shapes().back();
  return last.channels * last.length;
}

std::size_t EncoderConfig::stride_product(std::size_t layer) const {
  std::size_t p = 1;
  for (std::size_t i = 0; i <= layer && i < blocks.size(); ++i) p *= blocks[i].stride * blocks[i].pool_len;
  return p;
}

EncoderState EncoderState::initial(const EncoderConfig& config) {
  EncoderState s;
  for (const auto& b : config.blocks) s.bn.push_back(BatchNormState::initial(b.out_channels));
  return s;
}

ParamMap build_encoder(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  ParamMap params;
  Rng rng(seed, /*stream=*/1);
  std::size_t in_ch = config.in_channels;
  for (std::size_t i = 0; i < config.blocks.size(); ++i) {
    const auto& b = config.blocks[i];
    const std::string name = block_name(i);
    Tensor w({b.out_channels, in_ch, b.kernel_len});
    const double bound = std::sqrt(6.0 / static_cast<double>(in_ch * b.kernel_len));
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = rng.uniform(-bound, bound);
    params.emplace(name + ".conv.weight", std::move(w));
    params.emplace(name + ".bn.gamma", Tensor::full({b.out_channels}, 1.0));
    params.emplace(name + ".bn.beta", Tensor::zeros({b.out_channels}));
    in_ch = b.out_channels;
  }
  const std::size_t fan_in = config.head_inputs();
  Tensor w({fan_in, config.num_classes});
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = rng.uniform(-bound, bound);
  params.emplace("head.weight", std::move(w));
  params.emplace("head.bias", Tensor::zeros({config.num_classes}));
  return params;
}

ParamVars bind_params(Tape& tape, const ParamMap& params, bool requires_grad) {
  ParamVars vars;
  for (const auto& [name, t] : params) vars.emplace(name, tape.leaf(t, requires_grad));
  return vars;
}

ForwardResult encoder_forward(const ParamVars& params, const EncoderConfig& config,
                              EncoderState& state, Var x, Mode mode, const FeatureHook* hook) {
  const auto& xs = x.shape();
  if (xs.size() != 3 || xs[1] != config.in_channels || xs[2] != config.clip_len) {
    throw DimensionError("encoder input " + to_string(xs) + " does not match [B," +
                         std::to_string(config.in_channels) + "," + std::to_string(config.clip_len) + "]");
  }
  Var h = x;
  for (std::size_t i = 0; i <= config.insertion_layer; ++i) h = run_block(params, config, state, i, h, mode);
  x.tape().capture(h);
  Var fused = (hook && *hook) ? (*hook)(h) : h;
  return {encoder_tail(params, config, state, fused, mode), h};
}

Var encoder_tail(const ParamVars& params, const EncoderConfig& config, EncoderState& state,
                 Var features, Mode mode) {
  Var h = features;
  for (std::size_t i = config.insertion_layer + 1; i < config.blocks.size(); ++i) {
    h = run_block(params, config, state, i, h, mode);
  }
  const std::size_t batch = h.shape()[0];
  Var flat = reshape(h, {batch, h.value().size() / batch});
  return add(matmul(flat, params.at("head.weight")), params.at("head.bias"));
}

}  // namespace iefs
