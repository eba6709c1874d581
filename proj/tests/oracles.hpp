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

// Independent reference implementations used as test oracles. These are
// plain loops with no Eigen expressions and no sharing with the library
// code paths they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "iefs/gmb.hpp"
#include "iefs/metrics.hpp"
#include "iefs/tensor.hpp"

namespace iefs::oracle {

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), n = a.dim(1), p = b.dim(1);
  Tensor out({m, p});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a[i * n + k] * b[k * p + j];
      out[i * p + j] = s;
    }
  }
  return out;
}

inline Tensor conv1d(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t padding) {
  const std::size_t batch = x.dim(0), cin = x.dim(1), t = x.dim(2);
  const std::size_t cout = w.dim(0), k = w.dim(2);
  const std::size_t tout = (t + 2 * padding - k) / stride + 1;
  Tensor out({batch, cout, tout});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < cout; ++o) {
      for (std::size_t u = 0; u < tout; ++u) {
        double s = 0.0;
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t j = 0; j < k; ++j) {
            const long pos = static_cast<long>(u * stride + j) - static_cast<long>(padding);
            if (pos < 0 || pos >= static_cast<long>(t)) continue;
            s += x.at(b, c, static_cast<std::size_t>(pos)) * w.at(o, c, j);
          }
        }
        out.at(b, o, u) = s;
      }
    }
  }
  return out;
}

/// Train-mode batch norm over [B, C, S] using two-pass mean and biased
/// variance.
inline Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t batch = x.dim(0), ch = x.dim(1), s = x.rank() == 3 ? x.dim(2) : 1;
  Tensor out(x.shape());
  for (std::size_t c = 0; c < ch; ++c) {
    double mu = 0.0;
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t r = 0; r < s; ++r) mu += x[(b * ch + c) * s + r];
    mu /= static_cast<double>(batch * s);
    double var = 0.0;
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t r = 0; r < s; ++r) var += std::pow(x[(b * ch + c) * s + r] - mu, 2);
    var /= static_cast<double>(batch * s);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t r = 0; r < s; ++r) {
        const std::size_t i = (b * ch + c) * s + r;
        out[i] = (x[i] - mu) / std::sqrt(var + eps) * gamma[c] + beta[c];
      }
  }
  return out;
}

inline double cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double mx = logits[i * k];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits[i * k + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(logits[i * k + j] - mx);
    total += mx + std::log(z) - logits[i * k + static_cast<std::size_t>(labels[i])];
  }
  return total / static_cast<double>(n);
}

inline double shannon(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

inline double binary_entropy_sum(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
    if (x < 1.0) h -= (1.0 - x) * std::log(1.0 - x);
  }
  return h;
}

/// Brute-force AUROC: fraction of (positive, negative) pairs ordered
/// correctly, ties counting one half.
inline std::optional<double> auroc(const std::vector<ScoredLabel>& s) {
  double good = 0.0;
  std::size_t pairs = 0;
  for (const auto& a : s) {
    if (a.label != 1) continue;
    for (const auto& b : s) {
      if (b.label != 0) continue;
      ++pairs;
      if (a.prob_positive > b.prob_positive) good += 1.0;
      else if (a.prob_positive == b.prob_positive) good += 0.5;
    }
  }
  if (pairs == 0) return std::nullopt;
  return good / static_cast<double>(pairs);
}

inline double cosine(const double* a, const double* b, std::size_t n) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

/// Top-K by sorting every candidate: candidates ordered by descending
/// similarity on a 2^-30 grid, then ascending (iteration, sample).
inline std::vector<GradientRef> top_k(const std::deque<BankEntry>& entries, std::size_t k) {
  const auto& anchor = entries.back();
  const std::size_t feat = anchor.grads.size() / anchor.grads.dim(0);
  std::vector<GradientRef> out;
  for (std::size_t a = 0; a < anchor.grads.dim(0); ++a) {
    std::vector<std::pair<double, GradientRef>> all;
    for (std::size_t e = 0; e + 1 < entries.size(); ++e) {
      for (std::size_t i = 0; i < entries[e].grads.dim(0); ++i) {
        const double sim = cosine(anchor.grads.data() + a * feat, entries[e].grads.data() + i * feat, feat);
        all.push_back({std::round(sim * 1073741824.0) / 1073741824.0,
                       GradientRef{entries[e].iteration, i}});
      }
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second < y.second;
    });
    for (std::size_t j = 0; j < k; ++j) out.push_back(all[j].second);
  }
  return out;
}

/// Per-channel mean of a [N, C, S] tensor.
inline std::vector<double> channel_mean(const Tensor& t) {
  const std::size_t n = t.dim(0), c = t.dim(1), s = t.dim(2);
  std::vector<double> out(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < s; ++r) out[ch] += t.at(i, ch, r);
    out[ch] /= static_cast<double>(n * s);
  }
  return out;
}

/// The FS pipeline in scalar loops for train mode with softmax kind.
inline Tensor fs_forward(const Tensor& h, const std::vector<double>& alpha, const std::vector<double>& gamma,
                         const std::vector<double>& beta, double eps) {
  const std::size_t batch = h.dim(0), c = h.dim(1), s = h.dim(2);
  Tensor u(h.shape());
  for (std::size_t i = 0; i < batch; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t r = 0; r < s; ++r) u.at(i, ch, r) = alpha[ch] * h.at(i, ch, r);
  Tensor g({c}), b({c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    g[ch] = gamma[ch];
    b[ch] = beta[ch];
  }
  const Tensor v = batchnorm(u, g, b, eps);

  std::vector<double> ent(s);
  for (std::size_t r = 0; r < s; ++r) {
    std::vector<double> pooled(c, 0.0);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t i = 0; i < batch; ++i) pooled[ch] += v.at(i, ch, r);
      pooled[ch] /= static_cast<double>(batch);
    }
    double mx = pooled[0];
    for (double x : pooled) mx = std::max(mx, x);
    double z = 0.0;
    for (double x : pooled) z += std::exp(x - mx);
    std::vector<double> p(c);
    for (std::size_t ch = 0; ch < c; ++ch) p[ch] = std::exp(pooled[ch] - mx) / z;
    ent[r] = shannon(p);
  }
  double hmax = 0.0;
  for (double e : ent) hmax = std::max(hmax, e);

  Tensor out(h.shape());
  for (std::size_t r = 0; r < s; ++r) {
    const double lambda = hmax < 1e-12 ? 1.0 : 1.0 - ent[r] / hmax;
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) out.at(i, ch, r) = h.at(i, ch, r) + lambda * v.at(i, ch, r);
  }
  return out;
}

}  // namespace iefs::oracle
