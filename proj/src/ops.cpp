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

#include "iefs/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iefs/errors.hpp"

namespace iefs {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " +
                       to_string(b));
}

/// Period of b when broadcast against a (0 = incompatible).
std::size_t broadcast_period(const Shape& a, const Shape& b) {
  if (numel(b) == 1) return 1;
  if (b.size() > a.size()) return 0;
  if (!std::equal(b.begin(), b.end(), a.end() - static_cast<std::ptrdiff_t>(b.size()))) return 0;
  return numel(b);
}

struct AxisSplit {
  std::size_t outer, n, inner;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + to_string(shape));
  }
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Shape drop_axis(const Shape& shape, std::size_t axis) {
  Shape out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != axis) out.push_back(shape[i]);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

void require_rank(const char* op, const Var& v, std::size_t rank) {
  if (v.shape().size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         to_string(v.shape()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  if (as.size() != 2 || bs.size() != 2 || as[1] != bs[0]) mismatch("matmul", as, bs);
  const std::size_t m = as[0], n = bs[1];
  Tensor out({m, n});
  out.matrix(m).noalias() = a.value().matrix(m) * b.value().matrix(as[1]);
  return a.tape().record(std::move(out), {a, b}, [m, k = as[1], n](BackwardContext& ctx) {
    ConstMatrixMap g(ctx.grad_output().data(), idx(m), idx(n));
    if (ctx.needs_grad(0)) {
      MatrixMap ga(ctx.input_grad(0).data(), idx(m), idx(k));
      ga.noalias() += g * ctx.input(1).matrix(k).transpose();
    }
    if (ctx.needs_grad(1)) {
      MatrixMap gb(ctx.input_grad(1).data(), idx(k), idx(n));
      gb.noalias() += ctx.input(0).matrix(m).transpose() * g;
    }
  });
}

Var add(Var a, Var b) {
  const std::size_t period = broadcast_period(a.shape(), b.shape());
  if (period == 0) mismatch("add", a.shape(), b.shape());
  Tensor out = a.value();
  const auto& bv = b.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[idx(i % period)];
  return a.tape().record(std::move(out), {a, b}, [period](BackwardContext& ctx) {
    const auto& g = ctx.grad_output();
    if (ctx.needs_grad(0)) ctx.input_grad(0) += g;
    if (ctx.needs_grad(1)) {
      auto& gb = ctx.input_grad(1);
      for (Index i = 0; i < g.size(); ++i) gb[i % idx(period)] += g[i];
    }
  });
}

Var mul(Var a, Var b) {
  const std::size_t period = broadcast_period(a.shape(), b.shape());
  if (period == 0) mismatch("mul", a.shape(), b.shape());
  Tensor out = a.value();
  const auto& bv = b.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[idx(i % period)];
  return a.tape().record(std::move(out), {a, b}, [period](BackwardContext& ctx) {
    const auto& g = ctx.grad_output();
    const auto& av = ctx.input(0).values();
    const auto& bv = ctx.input(1).values();
    const Index p = idx(period);
    if (ctx.needs_grad(0)) {
      auto& ga = ctx.input_grad(0);
      for (Index i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i % p];
    }
    if (ctx.needs_grad(1)) {
      auto& gb = ctx.input_grad(1);
      for (Index i = 0; i < g.size(); ++i) gb[i % p] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out(a.shape(), a.value().values() * factor);
  return a.tape().record(std::move(out), {a}, [factor](BackwardContext& ctx) {
    ctx.input_grad(0) += factor * ctx.grad_output();
  });
}

Var relu(Var x) {
  Tensor out(x.shape(), x.value().values().cwiseMax(0.0));
  return x.tape().record(std::move(out), {x}, [](BackwardContext& ctx) {
    const auto& xv = ctx.input(0).values();
    const auto& g = ctx.grad_output();
    auto& gx = ctx.input_grad(0);
    for (Index i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var sigmoid(Var x) {
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = out[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  return x.tape().record(std::move(out), {x}, [](BackwardContext& ctx) {
    const auto& y = ctx.output().values();
    ctx.input_grad(0).array() += ctx.grad_output().array() * y.array() * (1.0 - y.array());
  });
}

Var softmax(Var x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis);
  Tensor out = x.value();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.n * s.inner + i;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < s.n; ++k) mx = std::max(mx, out[base + k * s.inner]);
      double total = 0.0;
      for (std::size_t k = 0; k < s.n; ++k) {
        double& v = out[base + k * s.inner];
        v = std::exp(v - mx);
        total += v;
      }
      for (std::size_t k = 0; k < s.n; ++k) out[base + k * s.inner] /= total;
    }
  }
  return x.tape().record(std::move(out), {x}, [s](BackwardContext& ctx) {
    const auto& y = ctx.output();
    const auto& g = ctx.grad_output();
    auto& gx = ctx.input_grad(0);
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.n * s.inner + i;
        double dot = 0.0;
        for (std::size_t k = 0; k < s.n; ++k) {
          const Index j = idx(base + k * s.inner);
          dot += g[j] * y[static_cast<std::size_t>(j)];
        }
        for (std::size_t k = 0; k < s.n; ++k) {
          const std::size_t j = base + k * s.inner;
          gx[idx(j)] += y[j] * (g[idx(j)] - dot);
        }
      }
    }
  });
}

Var mean(Var x, const std::vector<std::size_t>& axes) {
  const Shape& shape = x.shape();
  std::vector<bool> reduced(shape.size(), false);
  for (auto a : axes) {
    if (a >= shape.size()) {
      throw DimensionError("mean: axis " + std::to_string(a) + " out of range for " + to_string(shape));
    }
    reduced[a] = true;
  }
  Shape out_shape;
  std::size_t count = 1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (reduced[i]) {
      count *= shape[i];
    } else {
      out_shape.push_back(shape[i]);
    }
  }
  if (out_shape.empty()) out_shape.push_back(1);

  // Output index of every input element.
  std::vector<std::size_t> target(x.value().size());
  std::vector<std::size_t> counter(shape.size(), 0);
  for (std::size_t flat = 0; flat < target.size(); ++flat) {
    std::size_t t = 0;
    for (std::size_t d = 0; d < shape.size(); ++d) {
      if (!reduced[d]) t = t * shape[d] + counter[d];
    }
    target[flat] = t;
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++counter[d] < shape[d]) break;
      counter[d] = 0;
    }
  }

  Tensor out(out_shape);
  const auto& xv = x.value();
  for (std::size_t i = 0; i < target.size(); ++i) out[target[i]] += xv[i];
  out.values() /= static_cast<double>(count);
  return x.tape().record(std::move(out), {x},
                         [target = std::move(target), count](BackwardContext& ctx) {
                           const auto& g = ctx.grad_output();
                           auto& gx = ctx.input_grad(0);
                           const double inv = 1.0 / static_cast<double>(count);
                           for (std::size_t i = 0; i < target.size(); ++i) {
                             gx[idx(i)] += g[idx(target[i])] * inv;
                           }
                         });
}

Var sum(Var x) {
  Tensor out = Tensor::scalar(x.value().values().sum());
  return x.tape().record(std::move(out), {x}, [](BackwardContext& ctx) {
    ctx.input_grad(0).array() += ctx.grad_output()[0];
  });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.tape().record(std::move(out), {x},
                         [](BackwardContext& ctx) { ctx.input_grad(0) += ctx.grad_output(); });
}

Var mul_channel(Var x, Var factors) {
  const auto& xs = x.shape();
  if (xs.size() < 2 || factors.shape().size() != 1 || factors.shape()[0] != xs[1]) {
    mismatch("mul_channel", xs, factors.shape());
  }
  const AxisSplit s = split_axis(xs, 1);
  Tensor out = x.value();
  const auto& f = factors.value();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t c = 0; c < s.n; ++c) {
      out.values().segment(idx((o * s.n + c) * s.inner), idx(s.inner)) *= f[c];
    }
  }
  return x.tape().record(std::move(out), {x, factors}, [s](BackwardContext& ctx) {
    const auto& g = ctx.grad_output();
    const auto& xv = ctx.input(0).values();
    const auto& f = ctx.input(1).values();
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t c = 0; c < s.n; ++c) {
        const Index off = idx((o * s.n + c) * s.inner);
        const Index len = idx(s.inner);
        if (ctx.needs_grad(0)) ctx.input_grad(0).segment(off, len) += f[idx(c)] * g.segment(off, len);
        if (ctx.needs_grad(1)) ctx.input_grad(1)[idx(c)] += g.segment(off, len).dot(xv.segment(off, len));
      }
    }
  });
}

namespace {

struct ConvGeometry {
  std::size_t batch, in_ch, len, out_ch, kernel, stride, padding, out_len;
};

// Column matrix [Cin*k, T'] of one sample's padded input windows.
void im2col(const double* x, const ConvGeometry& g, RowMatrix& col) {
  col.resize(idx(g.in_ch * g.kernel), idx(g.out_len));
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    for (std::size_t k = 0; k < g.kernel; ++k) {
      double* row = col.data() + (c * g.kernel + k) * g.out_len;
      for (std::size_t t = 0; t < g.out_len; ++t) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t * g.stride + k) -
                                   static_cast<std::ptrdiff_t>(g.padding);
        row[t] = (src >= 0 && src < static_cast<std::ptrdiff_t>(g.len)) ? x[c * g.len + src] : 0.0;
      }
    }
  }
}

void col2im(const RowMatrix& col, const ConvGeometry& g, double* dx) {
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    for (std::size_t k = 0; k < g.kernel; ++k) {
      const double* row = col.data() + (c * g.kernel + k) * g.out_len;
      for (std::size_t t = 0; t < g.out_len; ++t) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t * g.stride + k) -
                                   static_cast<std::ptrdiff_t>(g.padding);
        if (src >= 0 && src < static_cast<std::ptrdiff_t>(g.len)) dx[c * g.len + src] += row[t];
      }
    }
  }
}

}  // namespace

Var conv1d(Var x, Var w, std::size_t stride, std::size_t padding) {
  require_rank("conv1d input", x, 3);
  require_rank("conv1d weight", w, 3);
  const auto& xs = x.shape();
  const auto& ws = w.shape();
  if (xs[1] != ws[1]) mismatch("conv1d", xs, ws);
  if (stride == 0) throw DimensionError("conv1d: stride must be >= 1");
  if (ws[2] > xs[2] + 2 * padding) {
    throw DimensionError("conv1d: kernel " + std::to_string(ws[2]) + " longer than padded input " +
                         std::to_string(xs[2] + 2 * padding) + " (shapes " + to_string(xs) + ", " +
                         to_string(ws) + ")");
  }
  ConvGeometry g{xs[0], xs[1], xs[2], ws[0], ws[2], stride, padding, 0};
  g.out_len = (g.len + 2 * padding - g.kernel) / stride + 1;

  Tensor out({g.batch, g.out_ch, g.out_len});
  ConstMatrixMap wm = w.value().matrix(g.out_ch);
  RowMatrix col;
  for (std::size_t b = 0; b < g.batch; ++b) {
    im2col(x.value().data() + b * g.in_ch * g.len, g, col);
    MatrixMap ob(out.data() + b * g.out_ch * g.out_len, idx(g.out_ch), idx(g.out_len));
    ob.noalias() = wm * col;
  }
  return x.tape().record(std::move(out), {x, w}, [g](BackwardContext& ctx) {
    const auto& grad = ctx.grad_output();
    const auto& xv = ctx.input(0);
    ConstMatrixMap wm = ctx.input(1).matrix(g.out_ch);
    RowMatrix col, dcol;
    for (std::size_t b = 0; b < g.batch; ++b) {
      ConstMatrixMap gb(grad.data() + b * g.out_ch * g.out_len, idx(g.out_ch), idx(g.out_len));
      if (ctx.needs_grad(1)) {
        im2col(xv.data() + b * g.in_ch * g.len, g, col);
        MatrixMap gw(ctx.input_grad(1).data(), idx(g.out_ch), idx(g.in_ch * g.kernel));
        gw.noalias() += gb * col.transpose();
      }
      if (ctx.needs_grad(0)) {
        dcol.noalias() = wm.transpose() * gb;
        col2im(dcol, g, ctx.input_grad(0).data() + b * g.in_ch * g.len);
      }
    }
  });
}

Var avg_pool1d(Var x, std::size_t pool) {
  require_rank("avg_pool1d", x, 3);
  const auto& xs = x.shape();
  if (pool == 0 || pool > xs[2]) {
    throw DimensionError("avg_pool1d: window " + std::to_string(pool) + " does not fit input " +
                         to_string(xs));
  }
  const std::size_t rows = xs[0] * xs[1], len = xs[2], out_len = len / pool;
  Tensor out({xs[0], xs[1], out_len});
  const auto& xv = x.value();
  const double inv = 1.0 / static_cast<double>(pool);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < out_len; ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < pool; ++k) acc += xv[r * len + t * pool + k];
      out[r * out_len + t] = acc * inv;
    }
  }
  return x.tape().record(std::move(out), {x}, [rows, len, out_len, pool, inv](BackwardContext& ctx) {
    const auto& g = ctx.grad_output();
    auto& gx = ctx.input_grad(0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t t = 0; t < out_len; ++t) {
        const double v = g[idx(r * out_len + t)] * inv;
        for (std::size_t k = 0; k < pool; ++k) gx[idx(r * len + t * pool + k)] += v;
      }
    }
  });
}

Var batchnorm(Var x, Var gamma, Var beta, BatchNormState& running, Mode mode, double eps,
              double momentum) {
  const auto& xs = x.shape();
  if (xs.size() != 2 && xs.size() != 3) {
    throw DimensionError("batchnorm: expected [B,C] or [B,C,S], got " + to_string(xs));
  }
  const std::size_t batch = xs[0], channels = xs[1], spatial = xs.size() == 3 ? xs[2] : 1;
  const Shape cshape{channels};
  if (gamma.shape() != cshape) mismatch("batchnorm gamma", xs, gamma.shape());
  if (beta.shape() != cshape) mismatch("batchnorm beta", xs, beta.shape());
  if (running.running_mean.shape() != cshape || running.running_var.shape() != cshape) {
    mismatch("batchnorm running stats", xs, running.running_mean.shape());
  }
  if (!(eps > 0.0)) throw ValidationError("batchnorm: eps must be positive");

  const double n = static_cast<double>(batch * spatial);
  const auto& xv = x.value();
  VectorXd mu(idx(channels)), var(idx(channels));
  if (mode == Mode::train) {
    mu.setZero();
    var.setZero();
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < channels; ++c) {
        mu[idx(c)] += xv.values().segment(idx((b * channels + c) * spatial), idx(spatial)).sum();
      }
    }
    mu /= n;
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < channels; ++c) {
        auto seg = xv.values().segment(idx((b * channels + c) * spatial), idx(spatial));
        var[idx(c)] += (seg.array() - mu[idx(c)]).square().sum();
      }
    }
    var /= n;
    const double unbias = n > 1.0 ? n / (n - 1.0) : 1.0;
    running.running_mean.values() = (1.0 - momentum) * running.running_mean.values() + momentum * mu;
    running.running_var.values() =
        (1.0 - momentum) * running.running_var.values() + (momentum * unbias) * var;
  } else {
    mu = running.running_mean.values();
    var = running.running_var.values();
  }
  const VectorXd inv_std = (var.array() + eps).rsqrt().matrix();

  Tensor xhat(xs);
  Tensor out(xs);
  const auto& gv = gamma.value();
  const auto& bv = beta.value();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      const Index off = idx((b * channels + c) * spatial);
      xhat.values().segment(off, idx(spatial)) =
          (xv.values().segment(off, idx(spatial)).array() - mu[idx(c)]) * inv_std[idx(c)];
      out.values().segment(off, idx(spatial)) =
          (xhat.values().segment(off, idx(spatial)).array() * gv[c] + bv[c]).matrix();
    }
  }
  return x.tape().record(
      std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std, batch, channels, spatial, n, mode](BackwardContext& ctx) {
        const auto& g = ctx.grad_output();
        const auto& gv = ctx.input(1).values();
        VectorXd sum_g = VectorXd::Zero(idx(channels));
        VectorXd sum_gx = VectorXd::Zero(idx(channels));
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t c = 0; c < channels; ++c) {
            const Index off = idx((b * channels + c) * spatial);
            sum_g[idx(c)] += g.segment(off, idx(spatial)).sum();
            sum_gx[idx(c)] += g.segment(off, idx(spatial)).dot(xhat.values().segment(off, idx(spatial)));
          }
        }
        if (ctx.needs_grad(1)) ctx.input_grad(1) += sum_gx;
        if (ctx.needs_grad(2)) ctx.input_grad(2) += sum_g;
        if (!ctx.needs_grad(0)) return;
        auto& gx = ctx.input_grad(0);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t c = 0; c < channels; ++c) {
            const Index off = idx((b * channels + c) * spatial);
            const Index ci = idx(c);
            const double k = gv[ci] * inv_std[ci];
            if (mode == Mode::train) {
              // d/dx of gamma * (x - mu) / sigma with batch mu, sigma.
              gx.segment(off, idx(spatial)).array() +=
                  k * (g.segment(off, idx(spatial)).array() - sum_g[ci] / n -
                       xhat.values().segment(off, idx(spatial)).array() * (sum_gx[ci] / n));
            } else {
              gx.segment(off, idx(spatial)) += k * g.segment(off, idx(spatial));
            }
          }
        }
      });
}

Var cross_entropy_logits(Var logits, std::span<const int> labels) {
  require_rank("cross_entropy_logits", logits, 2);
  const std::size_t batch = logits.shape()[0], classes = logits.shape()[1];
  if (labels.size() != batch) {
    throw ValidationError("cross_entropy_logits: " + std::to_string(labels.size()) +
                          " labels for batch of " + std::to_string(batch));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ValidationError("cross_entropy_logits: label " + std::to_string(y) + " outside [0, " +
                            std::to_string(classes) + ")");
    }
  }
  const auto& z = logits.value();
  RowMatrix prob(idx(batch), idx(classes));
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < classes; ++k) mx = std::max(mx, z[i * classes + k]);
    double total = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      prob(idx(i), idx(k)) = std::exp(z[i * classes + k] - mx);
      total += prob(idx(i), idx(k));
    }
    prob.row(idx(i)) /= total;
    loss += mx + std::log(total) - z[i * classes + static_cast<std::size_t>(labels[i])];
  }
  loss /= static_cast<double>(batch);
  std::vector<int> ys(labels.begin(), labels.end());
  return logits.tape().record(
      Tensor::scalar(loss), {logits},
      [prob = std::move(prob), ys = std::move(ys), batch, classes](BackwardContext& ctx) {
        const double g = ctx.grad_output()[0] / static_cast<double>(batch);
        MatrixMap gz(ctx.input_grad(0).data(), idx(batch), idx(classes));
        gz += g * prob;
        for (std::size_t i = 0; i < batch; ++i) gz(idx(i), ys[i]) -= g;
      });
}

Var entropy(Var p, std::size_t axis, Activation kind) {
  const AxisSplit s = split_axis(p.shape(), axis);
  const auto& pv = p.value();
  Tensor out(drop_axis(p.shape(), axis));
  auto term = [kind](double q) {
    auto plogp = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
    return kind == Activation::softmax ? -plogp(q) : -(plogp(q) + plogp(1.0 - q));
  };
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      double h = 0.0;
      for (std::size_t k = 0; k < s.n; ++k) h += term(pv[(o * s.n + k) * s.inner + i]);
      out[o * s.inner + i] = h;
    }
  }
  return p.tape().record(std::move(out), {p}, [s, kind](BackwardContext& ctx) {
    const auto& pv = ctx.input(0);
    const auto& g = ctx.grad_output();
    auto& gp = ctx.input_grad(0);
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const double go = g[idx(o * s.inner + i)];
        for (std::size_t k = 0; k < s.n; ++k) {
          const std::size_t j = (o * s.n + k) * s.inner + i;
          const double q = pv[j];
          double d = 0.0;
          if (kind == Activation::softmax) {
            if (q > 0.0) d = -(std::log(q) + 1.0);
          } else if (q > 0.0 && q < 1.0) {
            d = std::log1p(-q) - std::log(q);
          }
          gp[idx(j)] += go * d;
        }
      }
    }
  });
}

Var lambda_weights(Var entropies, double eps_h) {
  const auto& h = entropies.value();
  if (h.values().minCoeff() < 0.0) throw ValidationError("lambda_weights: entropies must be >= 0");
  Index arg = 0;
  const double mx = h.values().maxCoeff(&arg);
  if (mx < eps_h) {
    return entropies.tape().record(Tensor::full(h.shape(), 1.0), {entropies},
                                   [](BackwardContext&) {});
  }
  Tensor out(h.shape(), (1.0 - h.values().array() / mx).matrix());
  return entropies.tape().record(std::move(out), {entropies}, [mx, arg](BackwardContext& ctx) {
    const auto& g = ctx.grad_output();
    const auto& hv = ctx.input(0).values();
    auto& gh = ctx.input_grad(0);
    gh -= g / mx;
    gh[arg] += g.dot(hv) / (mx * mx);
  });
}

}  // namespace iefs
