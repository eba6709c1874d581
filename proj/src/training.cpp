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

#include "iefs/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "iefs/errors.hpp"
#include "iefs/rng.hpp"

namespace iefs {

namespace {

struct Batch {
  Tensor x;
  std::vector<int> labels;
};

Batch make_batch(const Dataset& d, std::span<const std::size_t> rows) {
  Batch b;
  const std::size_t per_clip = static_cast<std::size_t>(d.channels) * d.timestamps;
  b.x = Tensor({rows.size(), d.channels, d.timestamps});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& clip = d.clips[rows[i]];
    b.x.values().segment(static_cast<Eigen::Index>(i * per_clip), static_cast<Eigen::Index>(per_clip)) =
        clip.data.values();
    b.labels.push_back(clip.label);
  }
  return b;
}

void check_dataset(const Dataset& d, const TrainConfig& config, const char* which) {
  if (d.clips.empty()) throw ValidationError(std::string(which) + " dataset is empty");
  if (d.channels != config.encoder.in_channels || d.timestamps != config.encoder.clip_len) {
    throw ValidationError(std::string(which) + " dataset clips are " + std::to_string(d.channels) + "x" +
                          std::to_string(d.timestamps) + ", encoder expects " +
                          std::to_string(config.encoder.in_channels) + "x" +
                          std::to_string(config.encoder.clip_len));
  }
}

double positive_probability(const Tensor& logits, std::size_t row) {
  const double z0 = logits[row * 2], z1 = logits[row * 2 + 1];
  // softmax(z)[1] = sigmoid(z1 - z0)
  const double d = z1 - z0;
  return d >= 0.0 ? 1.0 / (1.0 + std::exp(-d)) : std::exp(d) / (1.0 + std::exp(d));
}

/// Eval-mode pass over `data`. With FS enabled and `alpha` null the hook is
/// skipped (only reachable mid-training, before the bank is ready).
EvalResult run_eval(const Checkpoint& c, const AlphaWeights* alpha, const Dataset& data) {
  const auto& config = c.config;
  EncoderState enc_state = c.encoder_state;
  FsState fs = FsState::initial(config.encoder.feature_shape().channels, config.encoder.activation_kind,
                                config.encoder.bn_eps, config.encoder.bn_momentum);
  fs.bn = c.fs_bn;

  EvalResult out;
  std::vector<std::size_t> rows(data.clips.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < rows.size(); start += config.batch_size) {
    const std::size_t n = std::min(config.batch_size, rows.size() - start);
    Batch batch = make_batch(data, std::span(rows).subspan(start, n));
    Tape tape;
    ParamVars pv = bind_params(tape, c.params, false);
    Var x = tape.leaf(std::move(batch.x));
    FeatureHook hook;
    if (config.fs_enabled && alpha) {
      hook = [&](Var h) { return fs_forward(h, alpha, pv.at(kFsGammaName), pv.at(kFsBetaName), fs, Mode::eval); };
    }
    ForwardResult fr = encoder_forward(pv, config.encoder, enc_state, x, Mode::eval, &hook);
    Var loss = cross_entropy_logits(fr.logits, batch.labels);
    loss_sum += loss.value()[0] * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.scores.push_back({positive_probability(fr.logits.value(), i), batch.labels[i]});
    }
  }
  out.loss = loss_sum / static_cast<double>(rows.size());
  out.metrics = evaluate_scores(out.scores);
  return out;
}

}  // namespace

std::string metrics_csv_header() { return "epoch,split,loss,acc,precision,recall,f1,auroc\n"; }

std::string metrics_csv_row(const EpochRecord& r) {
  char auc[32] = "NA";
  if (r.metrics.auroc) std::snprintf(auc, sizeof auc, "%.6f", *r.metrics.auroc);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%s\n", r.epoch, r.split.c_str(), r.loss,
                r.metrics.accuracy, r.metrics.precision, r.metrics.recall, r.metrics.f1, auc);
  return buf;
}

std::string alpha_trace_csv(const std::vector<AlphaRecord>& trace) {
  std::string out = "iteration,component,channel,value\n";
  char buf[96];
  for (const auto& rec : trace) {
    const std::pair<const char*, const Tensor*> parts[] = {
        {"alpha", &rec.alpha}, {"history", &rec.history}, {"recent", &rec.recent}};
    for (const auto& [name, t] : parts) {
      for (std::size_t c = 0; c < t->size(); ++c) {
        std::snprintf(buf, sizeof buf, "%lld,%s,%zu,%.17g\n", static_cast<long long>(rec.iteration), name, c,
                      (*t)[c]);
        out += buf;
      }
    }
  }
  return out;
}

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set,
                  const TrainOptions& options) {
  config.validate();
  check_dataset(train_set, config, "training");
  if (!val_set.clips.empty()) check_dataset(val_set, config, "validation");

  TrainResult result;
  Checkpoint& state = result.checkpoint;
  if (options.resume) {
    auto a = options.resume->config.echo();
    auto b = config.echo();
    a.pop_back();  // epochs may differ
    b.pop_back();
    if (a != b) throw ConfigError("checkpoint was written with a different configuration");
    state = *options.resume;
    state.config = config;
  } else {
    state = Checkpoint::initial(config);
  }

  const auto feat = config.encoder.feature_shape();
  GradientBank bank(config.gmb, feat.channels, feat.length);
  for (auto& e : state.bank) bank.push(e.iteration, e.grads);
  FsState fs = FsState::initial(feat.channels, config.encoder.activation_kind, config.encoder.bn_eps,
                                config.encoder.bn_momentum);
  fs.bn = state.fs_bn;

  std::optional<AlphaWeights> latest;
  if (state.frozen_alpha) {
    latest = AlphaWeights{};
    latest->alpha = *state.frozen_alpha;
  }

  const std::size_t n = train_set.clips.size();
  for (std::size_t epoch = static_cast<std::size_t>(state.epoch) + 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng(config.seed, /*stream=*/1000 + epoch).shuffle(order);

    double loss_sum = 0.0;
    std::vector<ScoredLabel> scores;
    scores.reserve(n);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t b = std::min(config.batch_size, n - start);
      const std::int64_t iteration = ++state.iteration;
      Batch batch = make_batch(train_set, std::span(order).subspan(start, b));

      std::optional<AlphaWeights> alpha;
      if (config.fs_enabled && bank.ready()) {
        auto sampled = sample_top_k(bank);
        alpha = compute_alpha(apply_decay(std::move(*sampled), config.gmb.gamma), config.gmb.m);
        result.alpha_trace.push_back({iteration, alpha->alpha, alpha->history, alpha->recent});
        latest = alpha;
      }

      Tape tape;
      ParamVars pv = bind_params(tape, state.params, true);
      Var x = tape.leaf(std::move(batch.x));
      Var fused;
      FeatureHook hook;
      if (config.fs_enabled) {
        hook = [&](Var h) {
          fused = fs_forward(h, alpha ? &*alpha : nullptr, pv.at(kFsGammaName), pv.at(kFsBetaName), fs,
                             Mode::train);
          return fused;
        };
      }
      ForwardResult fr = encoder_forward(pv, config.encoder, state.encoder_state, x, Mode::train, &hook);
      if (!fused.valid()) fused = fr.features;
      Var loss = cross_entropy_logits(fr.logits, batch.labels);
      const double lv = loss.value()[0];
      if (!std::isfinite(lv)) {
        throw DivergenceError("non-finite loss at iteration " + std::to_string(iteration), iteration);
      }
      tape.close();
      tape.backward(loss);

      if (options.on_iteration) {
        options.on_iteration({iteration, alpha.has_value(), config.fs_enabled ? &bank : nullptr, fr.features, fused});
      }

      ParamMap grads;
      for (const auto& [name, v] : pv) grads.emplace(name, tape.grad(v));
      if (config.fs_enabled) bank.push(iteration, tape.grad(fr.features));
      adam_step(state.params, grads, state.adam, config.adam);

      loss_sum += lv * static_cast<double>(b);
      for (std::size_t i = 0; i < b; ++i) {
        scores.push_back({positive_probability(fr.logits.value(), i), batch.labels[i]});
      }
    }

    state.fs_bn = fs.bn;
    state.bank = bank.entries();
    state.epoch = static_cast<std::int64_t>(epoch);
    result.log.push_back({epoch, "train", loss_sum / static_cast<double>(n), evaluate_scores(scores)});

    if (epoch == config.epochs && config.fs_enabled && latest) state.frozen_alpha = latest->alpha;
    if (val_set.clips.empty()) continue;

    std::optional<AlphaWeights> eval_alpha;
    if (config.fs_enabled && latest) {
      eval_alpha = AlphaWeights{};
      eval_alpha->frozen_alpha = latest->alpha;
    }
    EvalResult val = run_eval(state, eval_alpha ? &*eval_alpha : nullptr, val_set);
    result.log.push_back({epoch, "val", val.loss, val.metrics});
    if (val.metrics.accuracy > state.best_val_acc) {
      state.best_val_acc = val.metrics.accuracy;
      if (options.keep_best) {
        result.best = state;
        if (config.fs_enabled && latest) result.best->frozen_alpha = latest->alpha;
      }
    }
  }
  return result;
}

EvalResult evaluate(const Checkpoint& checkpoint, const Dataset& data) {
  check_dataset(data, checkpoint.config, "evaluation");
  std::optional<AlphaWeights> alpha;
  if (checkpoint.config.fs_enabled) {
    if (!checkpoint.frozen_alpha) throw ConfigError("checkpoint has feature selection enabled but no frozen alpha");
    alpha = AlphaWeights{};
    alpha->frozen_alpha = checkpoint.frozen_alpha;
  }
  return run_eval(checkpoint, alpha ? &*alpha : nullptr, data);
}

AttributionMap attribute_clip(const Checkpoint& checkpoint, const EegClip& clip) {
  const auto& config = checkpoint.config;
  if (!config.fs_enabled || !checkpoint.frozen_alpha) {
    throw ConfigError("attribution needs a checkpoint with a frozen alpha");
  }
  if (clip.data.shape() != Shape{config.encoder.in_channels, config.encoder.clip_len}) {
    throw DimensionError("clip shape " + to_string(clip.data.shape()) + " does not match the encoder");
  }
  AlphaWeights alpha;
  alpha.frozen_alpha = checkpoint.frozen_alpha;
  EncoderState enc_state = checkpoint.encoder_state;
  FsState fs = FsState::initial(config.encoder.feature_shape().channels, config.encoder.activation_kind,
                                config.encoder.bn_eps, config.encoder.bn_momentum);
  fs.bn = checkpoint.fs_bn;

  Tape tape;
  ParamVars pv = bind_params(tape, checkpoint.params, false);
  Var x = tape.leaf(clip.data.reshaped({1, config.encoder.in_channels, config.encoder.clip_len}));
  FeatureHook hook = [&](Var h) {
    return fs_forward(h, &alpha, pv.at(kFsGammaName), pv.at(kFsBetaName), fs, Mode::eval);
  };
  encoder_forward(pv, config.encoder, enc_state, x, Mode::eval, &hook);
  const std::size_t layer = config.encoder.insertion_layer;
  return export_attribution(fs, config.encoder.clip_len, config.encoder.stride_product(layer), clip.clip_id, layer);
}

}  // namespace iefs
