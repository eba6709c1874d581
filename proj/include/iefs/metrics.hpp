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
#include <optional>
#include <span>

namespace iefs {

struct ScoredLabel {
  double prob_positive;
  int label;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t n() const { return tp + fp + tn + fn; }

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct Rates {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  Confusion counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auroc;  // absent for single-class input
  std::size_t n = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Predicted positive when prob >= threshold.
Confusion confusion(std::span<const ScoredLabel> scores, double threshold = 0.5);

/// Zero denominators give 0 (precision with tp+fp=0, recall with tp+fn=0,
/// f1 with precision+recall=0). Requires n >= 1.
Rates rates(const Confusion& counts);

/// Mann-Whitney U / (n+ n-) with midranks for tied scores; nullopt unless
/// both classes are present.
std::optional<double> auroc(std::span<const ScoredLabel> scores);

MetricsReport evaluate_scores(std::span<const ScoredLabel> scores, double threshold = 0.5);

}  // namespace iefs
