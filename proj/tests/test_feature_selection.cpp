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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "iefs/errors.hpp"
#include "iefs/feature_selection.hpp"
#include "oracles.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace iefs;
using namespace iefs::testing;

TEST_CASE("batch pooling") {
  Rng rng(41);
  const Tensor one = random_tensor(rng, {1, 3, 4});
  CHECK(batch_pool(one) == one.reshaped({3, 4}));

  Tensor pair({2, 2, 3});
  for (std::size_t i = 0; i < 6; ++i) {
    pair[i] = rng.uniform(-1, 1);
    pair[6 + i] = -pair[i];
  }
  CHECK(batch_pool(pair).values().cwiseAbs().maxCoeff() == 0.0);

  const Tensor h = random_tensor(rng, {4, 3, 5});
  const Tensor pooled = batch_pool(h);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t r = 0; r < 5; ++r) {
      double s = 0.0;
      for (std::size_t i = 0; i < 4; ++i) s += h.at(i, c, r);
      CHECK(std::abs(pooled[c * 5 + r] - s / 4.0) < 1e-12);
    }
}

TEST_CASE("heat map") {
  Rng rng(42);
  Tape tape;
  Var g = tape.leaf(Tensor::full({3}, 1.0)), b = tape.leaf(Tensor::zeros({3}));
  FsState fs = FsState::initial(3, Activation::softmax);
  const Tensor h = random_normal(rng, {4, 3, 5});
  CHECK(heat_map(tape.leaf(h), Tensor::zeros({3}), g, b, fs, Mode::train).value().values().cwiseAbs().maxCoeff() == 0.0);

  // Per-channel standardised input with unit alpha passes through BN almost unchanged.
  const Tensor z = oracle::batchnorm(h, Tensor::full({3}, 1.0), Tensor::zeros({3}), 0.0);
  const Tensor v = heat_map(tape.leaf(z), Tensor::full({3}, 1.0), g, b, fs, Mode::train).value();
  CHECK(max_abs_diff(v, z) < 1e-4);

  const Tensor alpha = random_tensor(rng, {3}), gamma = random_tensor(rng, {3}), beta = random_tensor(rng, {3});
  Tensor scaled(h.shape());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t r = 0; r < 5; ++r) scaled.at(i, c, r) = alpha[c] * h.at(i, c, r);
  FsState fs2 = FsState::initial(3, Activation::softmax);
  const Tensor got = heat_map(tape.leaf(h), alpha, tape.leaf(gamma), tape.leaf(beta), fs2, Mode::train).value();
  CHECK(max_abs_diff(got, oracle::batchnorm(scaled, gamma, beta, 1e-5)) < 1e-12);
  CHECK_THROWS_AS(heat_map(tape.leaf(h), Tensor::zeros({4}), g, b, fs, Mode::train), DimensionError);
}

TEST_CASE("probability maps") {
  Tape tape;
  const Tensor s = probability(tape.leaf(Tensor::zeros({4})), Activation::softmax).value();
  for (std::size_t i = 0; i < 4; ++i) CHECK(s[i] == doctest::Approx(0.25));
  CHECK(probability(tape.leaf(Tensor::zeros({3})), Activation::sigmoid).value() == Tensor::full({3}, 0.5));
  const Tensor p = probability(tape.leaf(Tensor({4}, {std::log(1.0), std::log(2.0), std::log(3.0), std::log(4.0)})),
                               Activation::softmax).value();
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(p[i] - (i + 1.0) / 10.0) < 1e-15);
}

TEST_CASE("fs_forward matches the scalar pipeline") {
  Rng rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor h = random_normal(rng, {2, 4, 6});
    AlphaWeights a;
    a.alpha = random_tensor(rng, {4});
    const Tensor gamma = random_tensor(rng, {4}, 0.5, 1.5), beta = random_tensor(rng, {4});
    Tape tape;
    FsState fs = FsState::initial(4, Activation::softmax);
    const Tensor out = fs_forward(tape.leaf(h), &a, tape.leaf(gamma), tape.leaf(beta), fs, Mode::train).value();
    std::vector<double> av(a.alpha.data(), a.alpha.data() + 4), gv(gamma.data(), gamma.data() + 4),
        bv(beta.data(), beta.data() + 4);
    CHECK(max_abs_diff(out, oracle::fs_forward(h, av, gv, bv, 1e-5)) < 1e-12);
    CHECK(fs.warmup_done);
    CHECK(fs.last_lambda->shape() == Shape{6});
  }
}

TEST_CASE("fs_forward eval needs a frozen alpha") {
  Tape tape;
  FsState fs = FsState::initial(2, Activation::softmax);
  AlphaWeights a;
  a.alpha = Tensor::full({2}, 1.0);
  Var h = tape.leaf(Tensor({1, 2, 3}));
  Var g = tape.leaf(Tensor::full({2}, 1.0)), b = tape.leaf(Tensor::zeros({2}));
  CHECK_THROWS_AS(fs_forward(h, &a, g, b, fs, Mode::eval), ConfigError);
  CHECK_THROWS_AS(fs_forward(h, nullptr, g, b, fs, Mode::eval), ConfigError);
  CHECK_THROWS_AS(fs_forward(tape.leaf(Tensor({1, 3, 3})), &a, g, b, fs, Mode::train), DimensionError);
}

TEST_CASE("feature-selection properties") {
  const std::pair<const char*, Property> props[] = {
      {"lambda range", prop_lambda_range},           {"argmax zero", prop_argmax_zero},
      {"entropy bounds", prop_entropy_bounds},       {"softmax shift", prop_softmax_shift},
      {"warmup identity", prop_warmup_identity},     {"zero-lambda identity", prop_zero_lambda_identity},
  };
  std::uint64_t seed = 440;
  for (const auto& [name, p] : props) {
    const auto r = run_property(p, 100, seed++);
    INFO(name << ": " << r.first_failure);
    CHECK(r.failures == 0);
  }
}

TEST_CASE("attribution export") {
  FsState fs = FsState::initial(2, Activation::softmax);
  CHECK_THROWS_AS(export_attribution(fs, 10, 2, 0, 0), UsageError);
  fs.last_lambda = Tensor::full({5}, 1.0);
  const auto flat = export_attribution(fs, 250, 50, 7, 0);
  CHECK(flat.upsampled_per_timestamp == Tensor::full({250}, 1.0));

  fs.last_lambda = Tensor({5}, {0.1, 0.2, 0.3, 0.4, 0.5});
  const auto m = export_attribution(fs, 250, 50, 7, 1);
  for (std::size_t t = 0; t < 250; ++t) CHECK(m.upsampled_per_timestamp[t] == (*fs.last_lambda)[t / 50]);

  // Lengths not divisible by the stride clamp to the last location.
  fs.last_lambda = Tensor({2}, {0.0, 1.0});
  const auto tail = export_attribution(fs, 7, 3, 0, 0);
  CHECK(tail.upsampled_per_timestamp == Tensor({7}, {0, 0, 0, 1, 1, 1, 1}));

  std::ostringstream csv;
  write_attribution_csv(tail, csv);
  CHECK(csv.str() == "timestamp,weight\n0,0\n1,0\n2,0\n3,1\n4,1\n5,1\n6,1\n");
}
