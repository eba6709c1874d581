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

#include "iefs/feature_selection.hpp"

#include <algorithm>
#include <cstdio>

#include "iefs/errors.hpp"

namespace iefs {

FsState FsState::initial(std::size_t channels, Activation kind, double bn_eps, double bn_momentum) {
  FsState fs;
  fs.kind = kind;
  fs.bn = BatchNormState::initial(channels);
  fs.bn_eps = bn_eps;
  fs.bn_momentum = bn_momentum;
  return fs;
}

Tensor batch_pool(const Tensor& h) {
  if (h.rank() != 3) throw DimensionError("batch_pool expects [B,C,S], got " + to_string(h.shape()));
  const std::size_t b = h.dim(0);
  Tensor out({h.dim(1), h.dim(2)});
  out.values() = h.matrix(b).colwise().sum().transpose() / static_cast<double>(b);
  return out;
}

Var batch_pool(Var h) {
  if (h.shape().size() != 3) throw DimensionError("batch_pool expects [B,C,S], got " + to_string(h.shape()));
  return mean(h, {0});
}

Var heat_map(Var h, const Tensor& alpha, Var gamma, Var beta, FsState& fs, Mode mode) {
  const auto& hs = h.shape();
  if (hs.size() != 3 || alpha.shape() != Shape{hs[1]}) {
    throw DimensionError("heat_map: features " + to_string(hs) + " vs alpha " + to_string(alpha.shape()));
  }
  Var a = h.tape().leaf(alpha, false);
  return batchnorm(mul_channel(h, a), gamma, beta, fs.bn, mode, fs.bn_eps, fs.bn_momentum);
}

Var probability(Var v, Activation kind) {
  return kind == Activation::softmax ? softmax(v, 0) : sigmoid(v);
}

Var fs_forward(Var h, const AlphaWeights* alpha, Var gamma, Var beta, FsState& fs, Mode mode) {
  const auto& hs = h.shape();
  if (hs.size() != 3 || hs[1] != fs.bn.running_mean.size()) {
    throw DimensionError("feature selection configured for " + std::to_string(fs.bn.running_mean.size()) +
                         " channels, got features " + to_string(hs));
  }
  const Tensor* weights = nullptr;
  if (mode == Mode::train) {
    if (!alpha) return h;
    weights = &alpha->alpha;
  } else {
    if (!alpha || !alpha->frozen_alpha) {
      throw ConfigError("feature selection in eval mode needs a frozen alpha");
    }
    weights = &*alpha->frozen_alpha;
  }
  Var v = heat_map(h, *weights, gamma, beta, fs, mode);
  Var p = probability(batch_pool(v), fs.kind);
  Var lambda = lambda_weights(entropy(p, 0, fs.kind), fs.eps_h);
  fs.last_lambda = lambda.value();
  fs.warmup_done = true;
  return add(h, mul(v, lambda));
}

AttributionMap export_attribution(const FsState& fs, std::size_t timestamps,
                                  std::size_t stride_product, std::uint32_t clip_id,
                                  std::size_t layer) {
  if (!fs.last_lambda) throw UsageError("no feature weights recorded; run a forward pass first");
  if (stride_product == 0 || timestamps == 0) throw ValidationError("attribution needs positive sizes");
  const Tensor& lambda = *fs.last_lambda;
  AttributionMap map;
  map.lambda_per_location = lambda;
  map.upsampled_per_timestamp = Tensor({timestamps});
  for (std::size_t t = 0; t < timestamps; ++t) {
    map.upsampled_per_timestamp[t] = lambda[std::min(t / stride_product, lambda.size() - 1)];
  }
  map.clip_id = clip_id;
  map.layer = layer;
  return map;
}

void write_attribution_csv(const AttributionMap& map, std::ostream& out) {
  out << "timestamp,weight\n";
  char buf[64];
  for (std::size_t t = 0; t < map.upsampled_per_timestamp.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", t, map.upsampled_per_timestamp[t]);
    out << buf;
  }
}

}  // namespace iefs
