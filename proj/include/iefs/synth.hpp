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
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "iefs/tensor.hpp"

namespace iefs {

struct EegClip {
  std::uint32_t clip_id = 0;
  std::uint32_t group_id = 0;  // pseudo-subject
  std::uint8_t label = 0;
  Tensor data;                 // [channels, timestamps]

  friend bool operator==(const EegClip&, const EegClip&) = default;
};

struct Dataset {
  std::uint32_t channels = 16;
  std::uint32_t timestamps = 250;
  std::uint32_t sample_rate = 250;
  std::uint32_t n_groups = 1;
  std::vector<EegClip> clips;

  std::size_t size() const { return clips.size(); }
  std::size_t positives() const;
  const EegClip& find(std::uint32_t clip_id) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct CorpusSpec {
  std::size_t n_clips = 2000;
  double class_balance = 0.5;
  double noise_sigma = 1.0;
  double spike_amplitude = 5.0;
  double spike_width_min_ms = 20.0;  // per half-wave
  double spike_width_max_ms = 60.0;
  std::size_t spike_channels_min = 3;
  std::size_t spike_channels_max = 6;
  std::size_t n_groups = 40;
  std::size_t channels = 16;
  std::size_t timestamps = 250;
  std::size_t sample_rate = 250;
  std::uint64_t seed = 42;

  /// Throws ValidationError for infeasible specs.
  void validate() const;
};

/// Ground truth of an injected transient: timestamps [onset, end) on
/// channels [channel_begin, channel_end).
struct SpikeWindow {
  std::size_t onset = 0;
  std::size_t end = 0;
  std::size_t channel_begin = 0;
  std::size_t channel_end = 0;
};

struct SyntheticCorpus {
  Dataset dataset;
  std::map<std::uint32_t, SpikeWindow> spikes;  // positive clips only
};

/// Background of three random-phase sinusoids (4-30 Hz) plus Gaussian noise
/// on every channel; positive clips get one biphasic transient (sharp
/// positive half-wave, then a trough of half the amplitude) on a contiguous
/// channel span. Exactly round(n * class_balance) positives. Clip i belongs
/// to group i mod n_groups and draws from its own stream seeded with
/// seed + i. Samples are rounded to float precision so the dataset survives
/// a write/read cycle unchanged.
SyntheticCorpus generate(const CorpusSpec& spec);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct DatasetSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Shuffles groups (or clips when !by_group) with `seed`, then gives each
/// split floor(ratio * units) and hands the remainder out by largest
/// fractional part. Clips keep their original order within a split.
DatasetSplit split(const Dataset& d, const SplitRatios& ratios, bool by_group, std::uint64_t seed);

/// Bytes before the first clip record.
inline constexpr std::size_t kDatasetHeaderBytes = 4 + 2 + 4 * 5;

std::string encode_dataset(const Dataset& d);
Dataset decode_dataset(const std::string& bytes);
void write_dataset(const Dataset& d, const std::string& path);
Dataset read_dataset(const std::string& path);

}  // namespace iefs
