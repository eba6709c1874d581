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
#include <cstdio>
#include <map>
#include <set>

#include "iefs/binary_io.hpp"
#include "iefs/errors.hpp"
#include "iefs/training.hpp"

namespace iefs {

namespace {

constexpr char kMagic[4] = {'I', 'E', 'F', 'S'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeF64 = 1;
constexpr double kEchoVersion = 1.0;

std::string bank_key(std::size_t k, const char* field) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "bank.%04zu.%s", k, field);
  return buf;
}

Tensor vector_tensor(const std::vector<double>& v) {
  return Tensor({v.size()}, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(adam.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(adam.weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (seed >= (1ULL << 53)) throw ConfigError("seed must be below 2^53");
  gmb.validate();
  encoder.validate();
}

std::vector<double> TrainConfig::echo() const {
  std::vector<double> e{kEchoVersion,
                        static_cast<double>(encoder.in_channels),
                        static_cast<double>(encoder.clip_len),
                        static_cast<double>(encoder.blocks.size())};
  for (const auto& b : encoder.blocks) {
    e.push_back(static_cast<double>(b.out_channels));
    e.push_back(static_cast<double>(b.kernel_len));
    e.push_back(static_cast<double>(b.stride));
    e.push_back(static_cast<double>(b.pool_len));
  }
  const double rest[] = {static_cast<double>(encoder.insertion_layer),
                         static_cast<double>(encoder.num_classes),
                         encoder.activation_kind == Activation::softmax ? 0.0 : 1.0,
                         encoder.bn_eps,
                         encoder.bn_momentum,
                         static_cast<double>(batch_size),
                         adam.lr,
                         adam.weight_decay,
                         adam.beta1,
                         adam.beta2,
                         adam.eps,
                         static_cast<double>(seed),
                         static_cast<double>(gmb.q),
                         static_cast<double>(gmb.k),
                         gmb.m,
                         gmb.gamma,
                         fs_enabled ? 1.0 : 0.0,
                         static_cast<double>(epochs)};
  e.insert(e.end(), std::begin(rest), std::end(rest));
  return e;
}

TrainConfig TrainConfig::from_echo(const std::vector<double>& e) {
  auto bad = [] { return ConfigError("malformed config echo"); };
  if (e.size() < 4 || e[0] != kEchoVersion) throw bad();
  auto as_size = [&](double v) {
    if (!(v >= 0.0) || v != std::floor(v)) throw bad();
    return static_cast<std::size_t>(v);
  };
  TrainConfig c;
  std::size_t i = 1;
  c.encoder.in_channels = as_size(e[i++]);
  c.encoder.clip_len = as_size(e[i++]);
  const std::size_t n_blocks = as_size(e[i++]);
  if (e.size() != 4 + 4 * n_blocks + 18) throw bad();
  c.encoder.blocks.clear();
  for (std::size_t b = 0; b < n_blocks; ++b) {
    BlockSpec s;
    s.out_channels = as_size(e[i++]);
    s.kernel_len = as_size(e[i++]);
    s.stride = as_size(e[i++]);
    s.pool_len = as_size(e[i++]);
    c.encoder.blocks.push_back(s);
  }
  c.encoder.insertion_layer = as_size(e[i++]);
  c.encoder.num_classes = as_size(e[i++]);
  c.encoder.activation_kind = e[i++] == 0.0 ? Activation::softmax : Activation::sigmoid;
  c.encoder.bn_eps = e[i++];
  c.encoder.bn_momentum = e[i++];
  c.batch_size = as_size(e[i++]);
  c.adam.lr = e[i++];
  c.adam.weight_decay = e[i++];
  c.adam.beta1 = e[i++];
  c.adam.beta2 = e[i++];
  c.adam.eps = e[i++];
  c.seed = static_cast<std::uint64_t>(as_size(e[i++]));
  c.gmb.q = as_size(e[i++]);
  c.gmb.k = as_size(e[i++]);
  c.gmb.m = e[i++];
  c.gmb.gamma = e[i++];
  c.fs_enabled = e[i++] != 0.0;
  c.epochs = as_size(e[i++]);
  c.validate();
  return c;
}

Checkpoint Checkpoint::initial(const TrainConfig& config) {
  config.validate();
  Checkpoint c;
  c.config = config;
  c.params = build_encoder(config.encoder, config.seed);
  const auto fs_shape = config.encoder.feature_shape();
  if (config.fs_enabled) {
    c.params.emplace(kFsGammaName, Tensor::full({fs_shape.channels}, 1.0));
    c.params.emplace(kFsBetaName, Tensor::zeros({fs_shape.channels}));
  }
  c.encoder_state = EncoderState::initial(config.encoder);
  c.fs_bn = BatchNormState::initial(fs_shape.channels);
  c.adam = AdamState::initial(c.params);
  return c;
}

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  return encode_checkpoint(a) == encode_checkpoint(b);
}

std::string encode_checkpoint(const Checkpoint& c) {
  std::map<std::string, Tensor> named;
  named.emplace("config.echo", vector_tensor(c.config.echo()));
  for (const auto& [name, t] : c.params) named.emplace("param." + name, t);
  for (const auto& [name, t] : c.adam.m) named.emplace("adam.m." + name, t);
  for (const auto& [name, t] : c.adam.v) named.emplace("adam.v." + name, t);
  named.emplace("adam.step", Tensor::scalar(static_cast<double>(c.adam.step)));
  for (std::size_t i = 0; i < c.encoder_state.bn.size(); ++i) {
    const std::string p = "state.block" + std::to_string(i) + ".bn.";
    named.emplace(p + "running_mean", c.encoder_state.bn[i].running_mean);
    named.emplace(p + "running_var", c.encoder_state.bn[i].running_var);
  }
  if (c.config.fs_enabled) {
    named.emplace("state.fs.bn.running_mean", c.fs_bn.running_mean);
    named.emplace("state.fs.bn.running_var", c.fs_bn.running_var);
  }
  if (c.frozen_alpha) named.emplace("frozen_alpha", *c.frozen_alpha);
  for (std::size_t k = 0; k < c.bank.size(); ++k) {
    named.emplace(bank_key(k, "iteration"), Tensor::scalar(static_cast<double>(c.bank[k].iteration)));
    named.emplace(bank_key(k, "grads"), c.bank[k].grads);
  }
  named.emplace("progress", Tensor({3}, {static_cast<double>(c.epoch), static_cast<double>(c.iteration),
                                         c.best_val_acc}));

  ByteWriter w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put_u16(kVersion);
  w.put_u32(static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, t] : named) {
    w.put_u16(static_cast<std::uint16_t>(name.size()));
    w.put_bytes(name);
    w.put_u8(kDtypeF64);
    w.put_u8(static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.shape()) w.put_u32(static_cast<std::uint32_t>(d));
    w.put_bytes(std::string_view(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double)));
  }
  return w.release();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4, "magic") != std::string_view(kMagic, 4)) throw ParseError("bad checkpoint magic", 0);
  if (r.get_u16("version") != kVersion) throw ParseError("unsupported checkpoint version", 4);
  const std::uint32_t count = r.get_u32("tensor count");
  std::map<std::string, Tensor> named;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    const std::uint16_t len = r.get_u16("name length");
    std::string name(r.get_bytes(len, "name"));
    if (r.get_u8("dtype") != kDtypeF64) throw ParseError("unsupported dtype for " + name, at);
    const std::uint8_t rank = r.get_u8("rank");
    if (rank == 0) throw ParseError("zero-rank tensor " + name, at);
    Shape shape;
    for (std::uint8_t d = 0; d < rank; ++d) {
      const std::uint32_t dim = r.get_u32("dims");
      if (dim == 0) throw ParseError("zero dimension in " + name, at);
      shape.push_back(dim);
    }
    const std::size_t n = numel(shape);
    auto payload = r.get_bytes(n * sizeof(double), "payload");
    Eigen::VectorXd values(static_cast<Eigen::Index>(n));
    std::memcpy(values.data(), payload.data(), payload.size());
    if (!named.emplace(name, Tensor(std::move(shape), std::move(values))).second) {
      throw ParseError("duplicate tensor " + name, at);
    }
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after last tensor", r.offset());

  auto take = [&](const std::string& name) {
    auto it = named.find(name);
    if (it == named.end()) throw ParseError("checkpoint lacks tensor " + name, bytes.size());
    Tensor t = std::move(it->second);
    named.erase(it);
    return t;
  };

  const Tensor echo = take("config.echo");
  Checkpoint c = Checkpoint::initial(
      TrainConfig::from_echo(std::vector<double>(echo.data(), echo.data() + echo.size())));
  auto load_into = [&](ParamMap& target, const std::string& prefix) {
    for (auto& [name, t] : target) {
      Tensor loaded = take(prefix + name);
      if (loaded.shape() != t.shape()) {
        throw ParseError("shape mismatch for " + prefix + name + ": " + to_string(loaded.shape()), bytes.size());
      }
      t = std::move(loaded);
    }
  };
  load_into(c.params, "param.");
  load_into(c.adam.m, "adam.m.");
  load_into(c.adam.v, "adam.v.");
  c.adam.step = static_cast<std::int64_t>(take("adam.step")[0]);
  for (std::size_t i = 0; i < c.encoder_state.bn.size(); ++i) {
    const std::string p = "state.block" + std::to_string(i) + ".bn.";
    c.encoder_state.bn[i].running_mean = take(p + "running_mean");
    c.encoder_state.bn[i].running_var = take(p + "running_var");
  }
  if (c.config.fs_enabled) {
    c.fs_bn.running_mean = take("state.fs.bn.running_mean");
    c.fs_bn.running_var = take("state.fs.bn.running_var");
  }
  if (named.count("frozen_alpha")) c.frozen_alpha = take("frozen_alpha");
  for (std::size_t k = 0; named.count(bank_key(k, "grads")); ++k) {
    BankEntry e{static_cast<std::int64_t>(take(bank_key(k, "iteration"))[0]), take(bank_key(k, "grads"))};
    c.bank.push_back(std::move(e));
  }
  const Tensor progress = take("progress");
  if (progress.size() != 3) throw ParseError("malformed progress record", bytes.size());
  c.epoch = static_cast<std::int64_t>(progress[0]);
  c.iteration = static_cast<std::int64_t>(progress[1]);
  c.best_val_acc = progress[2];
  if (!named.empty()) throw ParseError("unexpected tensor " + named.begin()->first, bytes.size());
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) { write_file(path, encode_checkpoint(c)); }

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

}  // namespace iefs
