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

#include "doctest.h"
#include "iefs/errors.hpp"
#include "iefs/rng.hpp"
#include "iefs/tensor.hpp"

using namespace iefs;

TEST_CASE("tensor construction and access") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.rank() == 2);
  CHECK(t.size() == 6);
  CHECK(t.matrix(2)(1, 2) == 6.0);
  CHECK(Tensor::zeros({4}).values().sum() == 0.0);
  CHECK(Tensor::full({2, 2}, 3.0).values().sum() == 12.0);
  CHECK(Tensor::scalar(7.0).shape() == Shape{1});

  Tensor r({2, 2, 2});
  r.at(1, 0, 1) = 9.0;
  CHECK(r[5] == 9.0);
}

TEST_CASE("tensor shape errors") {
  CHECK_THROWS_AS(Tensor({2, 0}), DimensionError);
  CHECK_THROWS_AS(Tensor(Shape{}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 3}).reshaped({4, 2}), DimensionError);
}

TEST_CASE("tensor equality is bitwise") {
  Tensor a({2}, {0.0, 1.0});
  Tensor b({2}, {-0.0, 1.0});
  CHECK_FALSE(a == b);
  CHECK(a == a.reshaped({2}));
  CHECK_FALSE(a == a.reshaped({1, 2}));
  CHECK(max_abs_diff(a, b) == 0.0);
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42, 1), b(42, 1), c(42, 2);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  Rng u(7);
  double mean = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = u.normal();
    mean += z;
    sq += z * z;
  }
  mean /= n;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
  for (int i = 0; i < 1000; ++i) CHECK(u.below(5) < 5);
}
