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

#include "iefs/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "iefs/errors.hpp"

namespace iefs {

Confusion confusion(std::span<const ScoredLabel> scores, double threshold) {
  Confusion c;
  for (const auto& s : scores) {
    const bool predicted = s.prob_positive >= threshold;
    if (s.label == 1) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

Rates rates(const Confusion& c) {
  if (c.n() == 0) throw ValidationError("rates of an empty confusion matrix");
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  Rates r;
  r.accuracy = ratio(c.tp + c.tn, c.n());
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.f1 = (r.precision + r.recall) == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

std::optional<double> auroc(std::span<const ScoredLabel> scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a].prob_positive < scores[b].prob_positive;
  });

  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]].prob_positive == scores[order[i]].prob_positive) ++j;
    // Ranks are 1-based; ties share the midrank of their run.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (scores[order[k]].label == 1) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

MetricsReport evaluate_scores(std::span<const ScoredLabel> scores, double threshold) {
  MetricsReport m;
  m.counts = confusion(scores, threshold);
  m.n = m.counts.n();
  const Rates r = rates(m.counts);
  m.accuracy = r.accuracy;
  m.precision = r.precision;
  m.recall = r.recall;
  m.f1 = r.f1;
  m.auroc = auroc(scores);
  return m;
}

}  // namespace iefs
