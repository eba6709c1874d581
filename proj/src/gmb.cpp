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

#include "iefs/gmb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iefs/errors.hpp"

namespace iefs {

namespace {

constexpr double kMinNorm = 1e-12;

Eigen::VectorXd channel_average(const Tensor& t) {
  const std::size_t rows = t.dim(0), channels = t.dim(1), spatial = t.dim(2);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      avg[static_cast<Eigen::Index>(c)] +=
          t.values().segment(static_cast<Eigen::Index>((r * channels + c) * spatial),
                             static_cast<Eigen::Index>(spatial)).sum();
    }
  }
  return avg / static_cast<double>(rows * spatial);
}

}  // namespace

void GmbConfig::validate() const {
  if (q == 0) throw ConfigError("gmb q must be at least 1");
  if (k == 0) throw ConfigError("gmb K must be at least 1");
  if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("gmb m must lie in [0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gmb gamma must lie in (0, 1]");
}

GradientBank::GradientBank(const GmbConfig& config, std::size_t channels, std::size_t spatial)
    : config_(config), channels_(channels), spatial_(spatial) {
  if (config_.q == 0 || config_.k == 0) throw ConfigError("gradient bank needs q >= 1 and K >= 1");
}

void GradientBank::push(std::int64_t iteration, Tensor grads) {
  const auto& s = grads.shape();
  if (s.size() != 3 || s[1] != channels_ || s[2] != spatial_) {
    throw DimensionError("bank expects [b," + std::to_string(channels_) + "," + std::to_string(spatial_) +
                         "] gradients, got " + to_string(s));
  }
  if (!entries_.empty() && iteration <= entries_.back().iteration) {
    throw UsageError("bank iterations must increase: " + std::to_string(iteration) + " after " +
                     std::to_string(entries_.back().iteration));
  }
  entries_.push_back({iteration, std::move(grads)});
  while (entries_.size() > config_.q + 1) entries_.pop_front();
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine_sim: length mismatch");
  Eigen::Map<const Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(a.size()));
  Eigen::Map<const Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(b.size()));
  const double na = va.norm(), nb = vb.norm();
  if (na < kMinNorm || nb < kMinNorm) return 0.0;
  return std::clamp(va.dot(vb) / (na * nb), -1.0, 1.0);
}

double cosine_sim(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("cosine_sim: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  return cosine_sim(std::span(a.data(), a.size()), std::span(b.data(), b.size()));
}

std::optional<SampledGradients> sample_top_k(const GradientBank& bank) {
  const auto& entries = bank.entries();
  if (entries.size() < 2) return std::nullopt;

  const std::size_t feat = bank.channels() * bank.spatial();
  const BankEntry& anchor = entries.back();
  const std::size_t n_anchor = anchor.grads.dim(0);

  std::size_t n_cand = 0;
  for (std::size_t e = 0; e + 1 < entries.size(); ++e) n_cand += entries[e].grads.dim(0);
  const std::size_t k = bank.config().k;
  if (k > n_cand) {
    throw UsageError("top-K with K=" + std::to_string(k) + " but only " + std::to_string(n_cand) +
                     " candidate gradients");
  }

  // Candidates in (iteration, sample) order: the tie-break order.
  RowMatrix cand(static_cast<Eigen::Index>(n_cand), static_cast<Eigen::Index>(feat));
  std::vector<GradientRef> refs;
  std::vector<std::size_t> ages;
  refs.reserve(n_cand);
  for (std::size_t e = 0; e + 1 < entries.size(); ++e) {
    const auto& entry = entries[e];
    const auto rows = entry.grads.dim(0);
    cand.middleRows(static_cast<Eigen::Index>(refs.size()), static_cast<Eigen::Index>(rows)) =
        entry.grads.matrix(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      refs.push_back({entry.iteration, i});
      ages.push_back(static_cast<std::size_t>(anchor.iteration - entry.iteration) + 1);
    }
  }

  // Row-normalise both sides so one product gives every cosine similarity.
  auto normalise = [](RowMatrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double n = m.row(r).norm();
      if (n < kMinNorm) {
        m.row(r).setZero();
      } else {
        m.row(r) /= n;
      }
    }
  };
  RowMatrix anchors = anchor.grads.matrix(n_anchor);
  normalise(anchors);
  normalise(cand);
  const RowMatrix sim = anchors * cand.transpose();

  SampledGradients out;
  out.recent = anchor.grads;
  out.sampled = Tensor({n_anchor * k, bank.channels(), bank.spatial()});
  std::vector<std::size_t> order(n_cand);
  for (std::size_t a = 0; a < n_anchor; ++a) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto row = sim.row(static_cast<Eigen::Index>(a));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t x, std::size_t y) {
                        const double sx = similarity_key(row[static_cast<Eigen::Index>(x)]);
                        const double sy = similarity_key(row[static_cast<Eigen::Index>(y)]);
                        return sx > sy || (sx == sy && x < y);
                      });
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t c = order[j];
      const auto& ref = refs[c];
      const BankEntry& src = *std::find_if(entries.begin(), entries.end(),
                                           [&](const BankEntry& e) { return e.iteration == ref.iteration; });
      out.sampled.matrix(n_anchor * k).row(static_cast<Eigen::Index>(a * k + j)) =
          src.grads.matrix(src.grads.dim(0)).row(static_cast<Eigen::Index>(ref.sample));
      out.sources.push_back(ref);
      out.ages.push_back(ages[c]);
    }
  }
  return out;
}

SampledGradients apply_decay(SampledGradients s, double gamma) {
  if (s.decayed) throw UsageError("gradients already decayed");
  s.recent.values() *= gamma;
  const std::size_t rows = s.ages.size();
  auto m = s.sampled.matrix(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    m.row(static_cast<Eigen::Index>(r)) *= std::pow(gamma, static_cast<double>(s.ages[r]));
  }
  s.decayed = true;
  return s;
}

AlphaWeights compute_alpha(const SampledGradients& s, double m) {
  if (!s.decayed) throw UsageError("compute_alpha expects decayed gradients");
  if (!(m >= 0.0 && m <= 1.0)) throw ValidationError("momentum m must lie in [0, 1]");
  if (s.recent.rank() != 3 || s.sampled.rank() != 3 || s.recent.dim(1) != s.sampled.dim(1)) {
    throw DimensionError("compute_alpha: " + to_string(s.recent.shape()) + " vs " +
                         to_string(s.sampled.shape()));
  }
  AlphaWeights w;
  w.m = m;
  w.history = Tensor({s.recent.dim(1)}, channel_average(s.sampled));
  w.recent = Tensor({s.recent.dim(1)}, channel_average(s.recent));
  w.alpha = Tensor({s.recent.dim(1)}, m * w.history.values() + (1.0 - m) * w.recent.values());
  return w;
}

}  // namespace iefs
