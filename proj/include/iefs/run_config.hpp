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

#include <string>
#include <vector>

#include "iefs/synth.hpp"
#include "iefs/training.hpp"

namespace iefs {

/// Flat `key=value` configuration covering corpus generation, splitting and
/// training. Unknown keys are rejected and every value is parsed with the
/// key's type; `#` starts a comment.
struct RunConfig {
  CorpusSpec corpus;
  TrainConfig train;
  SplitRatios split;
  bool split_by_group = true;
  std::string data_path;

  /// Set one key from its textual value; ConfigError on unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  /// Parse file contents, applying each key on top of the current values.
  void merge_text(const std::string& text);
  void merge_file(const std::string& path);

  /// All keys in sorted order as `key=value` lines.
  std::string resolved() const;

  static const std::vector<std::string>& keys();
};

}  // namespace iefs
