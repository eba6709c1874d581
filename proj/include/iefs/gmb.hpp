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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "iefs/tensor.hpp"

namespace iefs {

/// Hyperparameters of the gradient memory bank.
struct GmbConfig {
  std::size_t q = 8;   // past iterations searched
  std::size_t k = 1;   // gradients kept per anchor
  double m = 0.2;      // momentum blend of history vs. most recent iteration
  double gamma = 0.25; // per-iteration decay

  void validate() const;
};

struct BankEntry {
  std::int64_t iteration;
  Tensor grads;  // [b, C, S]

  friend bool operator==(const BankEntry&, const BankEntry&) = default;
};

/// FIFO of per-sample feature-map gradients. Holds at most q + 1 entries:
/// the newest is the anchor iteration, the q before it are the search pool.
class GradientBank {
 public:
  GradientBank(const GmbConfig& config, std::size_t channels, std::size_t spatial);

  /// Enqueue the gradients of `iteration`, dropping the oldest entry once
  /// the queue exceeds q + 1. Iterations must strictly increase; the batch
  /// size may vary between entries.
  void push(std::int64_t iteration, Tensor grads);

  bool ready() const { return entries_.size() == config_.q + 1; }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return config_.q + 1; }
  const std::deque<BankEntry>& entries() const { return entries_; }
  const GmbConfig& config() const { return config_; }
  std::size_t channels() const { return channels_; }
  std::size_t spatial() const { return spatial_; }

 private:
  GmbConfig config_;
  std::size_t channels_;
  std::size_t spatial_;
  std::deque<BankEntry> entries_;
};

/// Cosine similarity of two equally sized vectors; 0 when either norm is
/// below 1e-12.
double cosine_sim(std::span<const double> a, std::span<const double> b);
double cosine_sim(const Tensor& a, const Tensor& b);

/// Ranking key of a cosine similarity: clamped to [-1, 1] and rounded to a
/// 2^-30 grid, so rounding noise between equivalent gradients (copies,
/// rescaled copies) cannot reorder them and the index tie-break decides.
inline double similarity_key(double sim) {
  return std::round(std::clamp(sim, -1.0, 1.0) * 0x1.0p30) * 0x1.0p-30;
}

struct GradientRef {
  std::int64_t iteration;
  std::size_t sample;

  friend bool operator==(const GradientRef&, const GradientRef&) = default;
  friend auto operator<=>(const GradientRef&, const GradientRef&) = default;
};

struct SampledGradients {
  Tensor recent;                     // anchors, age 1: [b, C, S]
  Tensor sampled;                    // top-K per anchor, anchor-major: [b*K, C, S]
  std::vector<std::size_t> ages;     // per sampled row, in [2, q+1]
  std::vector<GradientRef> sources;  // per sampled row
  bool decayed = false;
};

/// For every anchor in the newest entry, the K most similar gradients among
/// the older entries by similarity_key; ties go to the lower (iteration,
/// sample). Duplicates across anchors are kept. Returns nullopt while the
/// bank has no older entry (warmup). Throws UsageError if K exceeds the candidate count.
std::optional<SampledGradients> sample_top_k(const GradientBank& bank);

/// Scales the anchors by gamma and each sampled row by gamma^age.
SampledGradients apply_decay(SampledGradients s, double gamma);

struct AlphaWeights {
  Tensor alpha;                       // [C]
  double m = 0.0;
  Tensor history;                     // Avg of the decayed sampled set
  Tensor recent;                      // Avg of the decayed anchors
  std::optional<Tensor> frozen_alpha; // inference copy
};

/// alpha = m * Avg(decayed sampled) + (1 - m) * Avg(decayed anchors), where
/// Avg averages everything but the channel axis.
AlphaWeights compute_alpha(const SampledGradients& s, double m);

}  // namespace iefs
