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

// Gradient-check instances for every differentiable operation and for the
// composed encoder with feature selection. Each case draws fresh inputs from
// the generator it is handed.

#pragma once

#include <string>
#include <vector>

#include "iefs/encoder.hpp"
#include "iefs/feature_selection.hpp"
#include "iefs/ops.hpp"
#include "support.hpp"

namespace iefs::testing {

struct GradCase {
  std::string name;
  std::vector<Tensor> inputs;
  ScalarFn fn;
};

/// Values bounded away from zero, for inputs of kinked functions.
inline Tensor away_from_zero(Rng& rng, const Shape& shape) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double mag = rng.uniform(0.1, 1.0);
    t[i] = rng.uniform() < 0.5 ? -mag : mag;
  }
  return t;
}

inline std::vector<GradCase> op_cases(Rng& rng) {
  std::vector<GradCase> cases;
  auto w = [&](const Shape& s) { return random_tensor(rng, s); };

  {
    const Tensor wt = w({3, 2});
    cases.push_back({"matmul", {w({3, 4}), w({4, 2})},
                     [wt](Tape&, const std::vector<Var>& v) { return project(matmul(v[0], v[1]), wt); }});
  }
  {
    const Tensor wt = w({2, 3, 4});
    cases.push_back({"add", {w({2, 3, 4}), w({2, 3, 4})},
                     [wt](Tape&, const std::vector<Var>& v) { return project(add(v[0], v[1]), wt); }});
    cases.push_back({"add_suffix", {w({2, 3, 4}), w({3, 4})},
                     [wt](Tape&, const std::vector<Var>& v) { return project(add(v[0], v[1]), wt); }});
    cases.push_back({"mul", {w({2, 3, 4}), w({2, 3, 4})},
                     [wt](Tape&, const std::vector<Var>& v) { return project(mul(v[0], v[1]), wt); }});
    cases.push_back({"mul_suffix", {w({2, 3, 4}), w({4})},
                     [wt](Tape&, const std::vector<Var>& v) { return project(mul(v[0], v[1]), wt); }});
    cases.push_back({"mul_scalar", {w({2, 3, 4}), w({1})},
                     [wt](Tape&, const std::vector<Var>& v) { return project(mul(v[0], v[1]), wt); }});
    cases.push_back({"mul_channel", {w({2, 3, 4}), w({3})},
                     [wt](Tape&, const std::vector<Var>& v) { return project(mul_channel(v[0], v[1]), wt); }});
    cases.push_back({"scale", {w({2, 3, 4})},
                     [wt](Tape&, const std::vector<Var>& v) { return project(scale(v[0], -1.7), wt); }});
    cases.push_back({"relu", {away_from_zero(rng, {2, 3, 4})},
                     [wt](Tape&, const std::vector<Var>& v) { return project(relu(v[0]), wt); }});
    cases.push_back({"sigmoid", {random_tensor(rng, {2, 3, 4}, -4, 4)},
                     [wt](Tape&, const std::vector<Var>& v) { return project(sigmoid(v[0]), wt); }});
  }
  {
    const Tensor wt = w({4, 5});
    cases.push_back({"softmax_axis0", {random_tensor(rng, {4, 5}, -3, 3)},
                     [wt](Tape&, const std::vector<Var>& v) { return project(softmax(v[0], 0), wt); }});
    cases.push_back({"softmax_axis1", {random_tensor(rng, {4, 5}, -3, 3)},
                     [wt](Tape&, const std::vector<Var>& v) { return project(softmax(v[0], 1), wt); }});
    cases.push_back({"reshape", {w({4, 5})}, [wt](Tape&, const std::vector<Var>& v) {
                       return project(reshape(reshape(v[0], {20}), {4, 5}), wt);
                     }});
  }
  {
    const Tensor w02 = w({3});
    const Tensor w1 = w({2, 4});
    cases.push_back({"mean_axes02", {w({2, 3, 4})},
                     [w02](Tape&, const std::vector<Var>& v) { return project(mean(v[0], {0, 2}), w02); }});
    cases.push_back({"mean_axis1", {w({2, 3, 4})},
                     [w1](Tape&, const std::vector<Var>& v) { return project(mean(v[0], {1}), w1); }});
    cases.push_back({"sum", {w({2, 3, 4})},
                     [](Tape&, const std::vector<Var>& v) { return scale(sum(v[0]), 0.3); }});
  }
  {
    const Tensor wt = w({2, 4, 7});
    cases.push_back({"conv1d", {w({2, 3, 16}), w({4, 3, 5})}, [wt](Tape&, const std::vector<Var>& v) {
                       return project(conv1d(v[0], v[1], 2, 1), wt);
                     }});
    const Tensor wp = w({2, 3, 3});
    cases.push_back({"avg_pool1d", {w({2, 3, 7})},
                     [wp](Tape&, const std::vector<Var>& v) { return project(avg_pool1d(v[0], 2), wp); }});
  }
  {
    const Tensor w3 = w({4, 3, 5});
    const Tensor w2 = w({6, 3});
    cases.push_back({"batchnorm_train_3d", {w({4, 3, 5}), random_tensor(rng, {3}, 0.5, 1.5), w({3})},
                     [w3](Tape&, const std::vector<Var>& v) {
                       auto st = BatchNormState::initial(3);
                       return project(batchnorm(v[0], v[1], v[2], st, Mode::train, 1e-5, 0.1), w3);
                     }});
    cases.push_back({"batchnorm_train_2d", {w({6, 3}), random_tensor(rng, {3}, 0.5, 1.5), w({3})},
                     [w2](Tape&, const std::vector<Var>& v) {
                       auto st = BatchNormState::initial(3);
                       return project(batchnorm(v[0], v[1], v[2], st, Mode::train, 1e-5, 0.1), w2);
                     }});
    const BatchNormState frozen{w({3}), random_tensor(rng, {3}, 0.5, 2.0)};
    cases.push_back({"batchnorm_eval", {w({4, 3, 5}), random_tensor(rng, {3}, 0.5, 1.5), w({3})},
                     [w3, frozen](Tape&, const std::vector<Var>& v) {
                       auto st = frozen;
                       return project(batchnorm(v[0], v[1], v[2], st, Mode::eval, 1e-5, 0.1), w3);
                     }});
  }
  {
    std::vector<int> labels(5);
    for (auto& l : labels) l = static_cast<int>(rng.below(3));
    cases.push_back({"cross_entropy", {random_tensor(rng, {5, 3}, -3, 3)},
                     [labels](Tape&, const std::vector<Var>& v) { return cross_entropy_logits(v[0], labels); }});
  }
  {
    const Tensor wt = w({5});
    cases.push_back({"entropy_softmax", {random_tensor(rng, {4, 5}, 0.05, 0.95)},
                     [wt](Tape&, const std::vector<Var>& v) {
                       return project(entropy(v[0], 0, Activation::softmax), wt);
                     }});
    cases.push_back({"entropy_sigmoid", {random_tensor(rng, {4, 5}, 0.05, 0.95)},
                     [wt](Tape&, const std::vector<Var>& v) {
                       return project(entropy(v[0], 0, Activation::sigmoid), wt);
                     }});
    // Distinct entropies so the maximum is not tied.
    Tensor h({5});
    for (std::size_t i = 0; i < 5; ++i) h[i] = 0.2 * static_cast<double>(i + 1) + rng.uniform(0.0, 0.1);
    cases.push_back({"lambda_weights", {h}, [wt](Tape&, const std::vector<Var>& v) {
                       return project(lambda_weights(v[0], 1e-12), wt);
                     }});
  }
  return cases;
}

/// Small encoder used by the composed check: 3 channels x 40 samples.
inline EncoderConfig small_encoder() {
  EncoderConfig c;
  c.in_channels = 3;
  c.clip_len = 40;
  c.blocks = {{4, 5, 1, 2}, {5, 3, 1, 2}};
  c.insertion_layer = 0;
  return c;
}

/// Full forward of encoder + FS hook to the cross-entropy loss. Inputs are
/// the clip batch followed by every parameter in map order.
inline GradCase composed_case(Rng& rng, std::uint64_t seed) {
  const EncoderConfig config = small_encoder();
  ParamMap params = build_encoder(config, seed);
  const auto feat = config.feature_shape();
  params[kFsGammaName] = random_tensor(rng, {feat.channels}, 0.5, 1.5);
  params[kFsBetaName] = random_tensor(rng, {feat.channels}, -0.2, 0.2);
  std::vector<std::string> names;
  std::vector<Tensor> inputs{random_normal(rng, {4, config.in_channels, config.clip_len})};
  for (const auto& [name, t] : params) {
    names.push_back(name);
    inputs.push_back(t);
  }
  AlphaWeights alpha;
  alpha.alpha = random_tensor(rng, {feat.channels}, -1.0, 1.0);
  const std::vector<int> labels{0, 1, 1, 0};

  auto fn = [config, names, alpha, labels](Tape&, const std::vector<Var>& v) {
    ParamVars pv;
    for (std::size_t i = 0; i < names.size(); ++i) pv[names[i]] = v[i + 1];
    EncoderState state = EncoderState::initial(config);
    FsState fs = FsState::initial(config.feature_shape().channels, Activation::softmax);
    Var gamma = pv.at(kFsGammaName), beta = pv.at(kFsBetaName);
    FeatureHook hook = [&](Var h) { return fs_forward(h, &alpha, gamma, beta, fs, Mode::train); };
    auto out = encoder_forward(pv, config, state, v[0], Mode::train, &hook);
    return cross_entropy_logits(out.logits, labels);
  };
  return {"encoder+fs", inputs, fn};
}

}  // namespace iefs::testing
