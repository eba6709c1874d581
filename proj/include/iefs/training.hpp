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
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iefs/adam.hpp"
#include "iefs/encoder.hpp"
#include "iefs/feature_selection.hpp"
#include "iefs/gmb.hpp"
#include "iefs/metrics.hpp"
#include "iefs/synth.hpp"

namespace iefs {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  AdamSettings adam;
  std::uint64_t seed = 42;
  GmbConfig gmb;
  bool fs_enabled = true;
  EncoderConfig encoder;

  void validate() const;
  /// Numeric fingerprint stored in checkpoints. Everything but `epochs`
  /// must match for a checkpoint to resume a run.
  std::vector<double> echo() const;
  static TrainConfig from_echo(const std::vector<double>& echo);
};

/// Complete training state: enough to evaluate, attribute or resume.
struct Checkpoint {
  TrainConfig config;
  ParamMap params;
  EncoderState encoder_state;
  BatchNormState fs_bn;  // unused when FS is disabled
  AdamState adam;
  std::optional<Tensor> frozen_alpha;
  std::deque<BankEntry> bank;
  std::int64_t epoch = 0;      // completed epochs
  std::int64_t iteration = 0;  // completed iterations
  double best_val_acc = -1.0;

  /// Fresh state for `config`: built parameters, zero moments, empty bank.
  static Checkpoint initial(const TrainConfig& config);
};

bool operator==(const Checkpoint& a, const Checkpoint& b);

std::string encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct EpochRecord {
  std::size_t epoch;
  std::string split;
  double loss;
  MetricsReport metrics;
};

/// CSV header `epoch,split,loss,acc,precision,recall,f1,auroc`, 6 decimals,
/// `NA` for an undefined AUROC.
std::string metrics_csv_header();
std::string metrics_csv_row(const EpochRecord& r);

struct AlphaRecord {
  std::int64_t iteration;
  Tensor alpha;
  Tensor history;
  Tensor recent;
};

/// Long format: `iteration,component,channel,value` with component one of
/// alpha, history, recent.
std::string alpha_trace_csv(const std::vector<AlphaRecord>& trace);

struct IterationInfo {
  std::int64_t iteration;
  bool fs_active;             // alpha available for this iteration
  const GradientBank* bank;   // before this iteration's push; null without FS
  Var features;               // h_l on the iteration's tape
  Var fused;                  // features after the FS hook
};

struct TrainOptions {
  const Checkpoint* resume = nullptr;
  bool keep_best = true;
  std::function<void(const IterationInfo&)> on_iteration;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::optional<Checkpoint> best;  // best validation accuracy within this run
  std::vector<EpochRecord> log;
  std::vector<AlphaRecord> alpha_trace;
};

/// Mini-batch training with the gradient bank feeding feature selection.
/// Batch order is reshuffled each epoch from (seed, epoch); the bank is not
/// reset between epochs. Throws DivergenceError on a non-finite loss.
TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set,
                  const TrainOptions& options = {});

struct EvalResult {
  double loss = 0.0;
  MetricsReport metrics;
  std::vector<ScoredLabel> scores;
};

/// Eval-mode pass with frozen batch-norm statistics and frozen alpha.
/// Throws ConfigError when FS is enabled but no frozen alpha exists.
EvalResult evaluate(const Checkpoint& checkpoint, const Dataset& data);

/// Eval-mode forward of one clip followed by export of its feature weights.
AttributionMap attribute_clip(const Checkpoint& checkpoint, const EegClip& clip);

}  // namespace iefs
