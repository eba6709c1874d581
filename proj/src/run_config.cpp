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

#include "iefs/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "iefs/binary_io.hpp"
#include "iefs/errors.hpp"

namespace iefs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError("key " + key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError("key " + key + ": expected a number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key " + key + ": expected true or false, got '" + v + "'");
}

std::string format_double(double v) {
  char buf[40];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    double back = 0.0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back == v) break;
  }
  return buf;
}

std::vector<BlockSpec> parse_blocks(const std::string& key, const std::string& v) {
  std::vector<BlockSpec> blocks;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::vector<std::size_t> parts;
    std::stringstream is(trim(item));
    std::string part;
    while (std::getline(is, part, ':')) parts.push_back(parse_size(key, trim(part)));
    if (parts.size() != 4) {
      throw ConfigError("key " + key + ": blocks are out_channels:kernel:stride:pool, got '" + item + "'");
    }
    blocks.push_back({parts[0], parts[1], parts[2], parts[3]});
  }
  if (blocks.empty()) throw ConfigError("key " + key + ": at least one block required");
  return blocks;
}

std::string format_blocks(const std::vector<BlockSpec>& blocks) {
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += ",";
    const auto& b = blocks[i];
    out += std::to_string(b.out_channels) + ":" + std::to_string(b.kernel_len) + ":" + std::to_string(b.stride) +
           ":" + std::to_string(b.pool_len);
  }
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Get>
Field size_field(Get member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = parse_size(k, v); },
          [member](const RunConfig& c) { return std::to_string(member(c)); }};
}

template <class Get>
Field double_field(Get member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = parse_double(k, v); },
          [member](const RunConfig& c) { return format_double(member(c)); }};
}

template <class Get>
Field bool_field(Get member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = parse_bool(k, v); },
          [member](const RunConfig& c) { return std::string(member(c) ? "true" : "false"); }};
}

const std::map<std::string, Field>& schema() {
  static const std::map<std::string, Field> fields = [] {
    std::map<std::string, Field> f;
    // corpus
    f["n_clips"] = size_field([](auto& c) -> auto& { return c.corpus.n_clips; });
    f["class_balance"] = double_field([](auto& c) -> auto& { return c.corpus.class_balance; });
    f["noise_sigma"] = double_field([](auto& c) -> auto& { return c.corpus.noise_sigma; });
    f["spike_amplitude"] = double_field([](auto& c) -> auto& { return c.corpus.spike_amplitude; });
    f["spike_width_min_ms"] = double_field([](auto& c) -> auto& { return c.corpus.spike_width_min_ms; });
    f["spike_width_max_ms"] = double_field([](auto& c) -> auto& { return c.corpus.spike_width_max_ms; });
    f["spike_channels_min"] = size_field([](auto& c) -> auto& { return c.corpus.spike_channels_min; });
    f["spike_channels_max"] = size_field([](auto& c) -> auto& { return c.corpus.spike_channels_max; });
    f["n_groups"] = size_field([](auto& c) -> auto& { return c.corpus.n_groups; });
    f["channels"] = size_field([](auto& c) -> auto& { return c.corpus.channels; });
    f["timestamps"] = size_field([](auto& c) -> auto& { return c.corpus.timestamps; });
    f["sample_rate"] = size_field([](auto& c) -> auto& { return c.corpus.sample_rate; });
    // seed drives corpus generation, splitting and training alike
    f["seed"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                   c.corpus.seed = c.train.seed = parse_size(k, v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.train.seed); }};
    // training
    f["epochs"] = size_field([](auto& c) -> auto& { return c.train.epochs; });
    f["batch_size"] = size_field([](auto& c) -> auto& { return c.train.batch_size; });
    f["lr"] = double_field([](auto& c) -> auto& { return c.train.adam.lr; });
    f["weight_decay"] = double_field([](auto& c) -> auto& { return c.train.adam.weight_decay; });
    f["adam_beta1"] = double_field([](auto& c) -> auto& { return c.train.adam.beta1; });
    f["adam_beta2"] = double_field([](auto& c) -> auto& { return c.train.adam.beta2; });
    f["adam_eps"] = double_field([](auto& c) -> auto& { return c.train.adam.eps; });
    f["q"] = size_field([](auto& c) -> auto& { return c.train.gmb.q; });
    f["K"] = size_field([](auto& c) -> auto& { return c.train.gmb.k; });
    f["m"] = double_field([](auto& c) -> auto& { return c.train.gmb.m; });
    f["gamma"] = double_field([](auto& c) -> auto& { return c.train.gmb.gamma; });
    f["fs_enabled"] = bool_field([](auto& c) -> auto& { return c.train.fs_enabled; });
    f["insertion_layer"] = size_field([](auto& c) -> auto& { return c.train.encoder.insertion_layer; });
    f["bn_eps"] = double_field([](auto& c) -> auto& { return c.train.encoder.bn_eps; });
    f["bn_momentum"] = double_field([](auto& c) -> auto& { return c.train.encoder.bn_momentum; });
    f["blocks"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                     c.train.encoder.blocks = parse_blocks(k, v);
                   },
                   [](const RunConfig& c) { return format_blocks(c.train.encoder.blocks); }};
    f["activation"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                         if (v == "softmax") {
                           c.train.encoder.activation_kind = Activation::softmax;
                         } else if (v == "sigmoid") {
                           c.train.encoder.activation_kind = Activation::sigmoid;
                         } else {
                           throw ConfigError("key " + k + ": expected softmax or sigmoid, got '" + v + "'");
                         }
                       },
                       [](const RunConfig& c) {
                         return std::string(c.train.encoder.activation_kind == Activation::softmax ? "softmax"
                                                                                                   : "sigmoid");
                       }};
    // splitting
    f["split_train"] = double_field([](auto& c) -> auto& { return c.split.train; });
    f["split_val"] = double_field([](auto& c) -> auto& { return c.split.val; });
    f["split_test"] = double_field([](auto& c) -> auto& { return c.split.test; });
    f["split_by_group"] = bool_field([](auto& c) -> auto& { return c.split_by_group; });
    // paths
    f["data"] = {[](RunConfig& c, const std::string&, const std::string& v) { c.data_path = v; },
                 [](const RunConfig& c) { return c.data_path; }};
    return f;
  }();
  return fields;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = schema().find(key);
  if (it == schema().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(*this, key, trim(value));
}

std::string RunConfig::get(const std::string& key) const {
  auto it = schema().find(key);
  if (it == schema().end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.get(*this);
}

void RunConfig::merge_text(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::set<std::string> seen;
  for (std::size_t lineno = 1; std::getline(ss, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    set(key, line.substr(eq + 1));
  }
}

void RunConfig::merge_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  merge_text(text);
}

std::string RunConfig::resolved() const {
  std::string out;
  for (const auto& [key, field] : schema()) out += key + "=" + field.get(*this) + "\n";
  return out;
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> k;
    for (const auto& [key, field] : schema()) k.push_back(key);
    return k;
  }();
  return names;
}

}  // namespace iefs
