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

#include "iefs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "iefs/binary_io.hpp"
#include "iefs/errors.hpp"
#include "iefs/rng.hpp"

namespace iefs {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("write failed for " + path);
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(clips.begin(), clips.end(), [](const EegClip& c) { return c.label == 1; }));
}

const EegClip& Dataset::find(std::uint32_t clip_id) const {
  auto it = std::find_if(clips.begin(), clips.end(), [&](const EegClip& c) { return c.clip_id == clip_id; });
  if (it == clips.end()) throw ValidationError("no clip with id " + std::to_string(clip_id));
  return *it;
}

namespace {

std::size_t ms_to_samples(double ms, std::size_t rate) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ms * static_cast<double>(rate) / 1000.0)));
}

}  // namespace

void CorpusSpec::validate() const {
  if (n_clips == 0) throw ValidationError("n_clips must be positive");
  if (channels == 0 || timestamps == 0 || sample_rate == 0) {
    throw ValidationError("channels, timestamps and sample_rate must be positive");
  }
  if (!(class_balance >= 0.0 && class_balance <= 1.0)) throw ValidationError("class_balance must lie in [0, 1]");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ValidationError("noise_sigma must be >= 0");
  if (!(spike_amplitude > 0.0) || !std::isfinite(spike_amplitude)) {
    throw ValidationError("spike_amplitude must be positive");
  }
  if (!(spike_width_min_ms > 0.0 && spike_width_min_ms <= spike_width_max_ms)) {
    throw ValidationError("spike width range must satisfy 0 < min <= max");
  }
  if (2 * ms_to_samples(spike_width_max_ms, sample_rate) > timestamps) {
    throw ValidationError("spike width range does not fit in the clip duration");
  }
  if (spike_channels_min == 0 || spike_channels_min > spike_channels_max || spike_channels_max > channels) {
    throw ValidationError("spike channel span must satisfy 1 <= min <= max <= channels");
  }
  if (n_groups == 0) throw ValidationError("n_groups must be at least 1");
  if (n_clips > UINT32_MAX || channels > UINT32_MAX || timestamps > UINT32_MAX) {
    throw ValidationError("corpus dimensions exceed the file format");
  }
}

SyntheticCorpus generate(const CorpusSpec& spec) {
  spec.validate();
  SyntheticCorpus corpus;
  Dataset& d = corpus.dataset;
  d.channels = static_cast<std::uint32_t>(spec.channels);
  d.timestamps = static_cast<std::uint32_t>(spec.timestamps);
  d.sample_rate = static_cast<std::uint32_t>(spec.sample_rate);
  d.n_groups = static_cast<std::uint32_t>(std::min(spec.n_groups, spec.n_clips));  // groups actually populated

  const auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(spec.n_clips) * spec.class_balance));
  std::vector<std::uint8_t> labels(spec.n_clips, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  Rng label_rng(spec.seed, /*stream=*/2);
  label_rng.shuffle(labels);

  const double rate = static_cast<double>(spec.sample_rate);
  const double sigma = spec.noise_sigma;
  d.clips.reserve(spec.n_clips);
  for (std::size_t i = 0; i < spec.n_clips; ++i) {
    Rng rng(spec.seed + i, /*stream=*/3);
    EegClip clip;
    clip.clip_id = static_cast<std::uint32_t>(i);
    clip.group_id = static_cast<std::uint32_t>(i % spec.n_groups);
    clip.label = labels[i];
    clip.data = Tensor({spec.channels, spec.timestamps});
    for (std::size_t c = 0; c < spec.channels; ++c) {
      double freq[3], phase[3], amp[3];
      for (int w = 0; w < 3; ++w) {
        freq[w] = rng.uniform(4.0, 30.0);
        phase[w] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        amp[w] = rng.uniform(0.2, 0.6) * sigma;
      }
      for (std::size_t t = 0; t < spec.timestamps; ++t) {
        const double time = static_cast<double>(t) / rate;
        double v = sigma * rng.normal();
        for (int w = 0; w < 3; ++w) v += amp[w] * std::sin(2.0 * std::numbers::pi * freq[w] * time + phase[w]);
        clip.data[c * spec.timestamps + t] = v;
      }
    }
    if (clip.label == 1) {
      const std::size_t rise = ms_to_samples(rng.uniform(spec.spike_width_min_ms, spec.spike_width_max_ms), spec.sample_rate);
      const std::size_t fall = ms_to_samples(rng.uniform(spec.spike_width_min_ms, spec.spike_width_max_ms), spec.sample_rate);
      const std::size_t width = rise + fall;
      const std::size_t onset = rng.below(spec.timestamps - width + 1);
      const std::size_t span = spec.spike_channels_min + rng.below(spec.spike_channels_max - spec.spike_channels_min + 1);
      const std::size_t first = rng.below(spec.channels - span + 1);
      for (std::size_t c = first; c < first + span; ++c) {
        for (std::size_t k = 0; k < rise; ++k) {
          clip.data[c * spec.timestamps + onset + k] +=
              spec.spike_amplitude * std::sin(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(rise));
        }
        for (std::size_t k = 0; k < fall; ++k) {
          clip.data[c * spec.timestamps + onset + rise + k] -=
              0.5 * spec.spike_amplitude * std::sin(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(fall));
        }
      }
      corpus.spikes[clip.clip_id] = {onset, onset + width, first, first + span};
    }
    for (std::size_t k = 0; k < clip.data.size(); ++k) clip.data[k] = static_cast<float>(clip.data[k]);
    d.clips.push_back(std::move(clip));
  }
  return corpus;
}

DatasetSplit split(const Dataset& d, const SplitRatios& ratios, bool by_group, std::uint64_t seed) {
  const double r[3] = {ratios.train, ratios.val, ratios.test};
  for (double v : r) {
    if (!(v >= 0.0)) throw ValidationError("split ratios must be non-negative");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");
  const auto nonzero = static_cast<std::size_t>(std::count_if(std::begin(r), std::end(r), [](double v) { return v > 0.0; }));

  // Units are groups or single clips.
  std::vector<std::uint32_t> units;
  if (by_group) {
    std::set<std::uint32_t> groups;
    for (const auto& c : d.clips) groups.insert(c.group_id);
    units.assign(groups.begin(), groups.end());
    if (units.size() < nonzero) {
      throw ValidationError("cannot split " + std::to_string(units.size()) + " groups into " +
                            std::to_string(nonzero) + " non-empty parts");
    }
  } else {
    for (std::size_t i = 0; i < d.clips.size(); ++i) units.push_back(static_cast<std::uint32_t>(i));
    if (units.size() < nonzero) throw ValidationError("fewer clips than requested splits");
  }
  Rng rng(seed, /*stream=*/4);
  rng.shuffle(units);

  const double total = static_cast<double>(units.size());
  std::size_t counts[3];
  double frac[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = r[i] * total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    frac[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  for (std::size_t left = units.size() - std::min(assigned, units.size()); left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (frac[i] > frac[best]) best = i;
    }
    ++counts[best];
    frac[best] = -1.0;
  }

  std::map<std::uint32_t, int> part_of;
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < counts[i]; ++k) part_of[units[pos++]] = i;
  }

  DatasetSplit out;
  for (Dataset* part : {&out.train, &out.val, &out.test}) {
    part->channels = d.channels;
    part->timestamps = d.timestamps;
    part->sample_rate = d.sample_rate;
    part->n_groups = d.n_groups;
  }
  Dataset* parts[3] = {&out.train, &out.val, &out.test};
  for (std::size_t i = 0; i < d.clips.size(); ++i) {
    const auto key = by_group ? d.clips[i].group_id : static_cast<std::uint32_t>(i);
    parts[part_of.at(key)]->clips.push_back(d.clips[i]);
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'E', 'E', 'G', 'S'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

std::string encode_dataset(const Dataset& d) {
  ByteWriter w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put_u16(kVersion);
  w.put_u32(static_cast<std::uint32_t>(d.clips.size()));
  w.put_u32(d.channels);
  w.put_u32(d.timestamps);
  w.put_u32(d.sample_rate);
  w.put_u32(d.n_groups);
  const std::size_t samples = static_cast<std::size_t>(d.channels) * d.timestamps;
  for (const auto& c : d.clips) {
    if (c.data.size() != samples) {
      throw ValidationError("clip " + std::to_string(c.clip_id) + " has " + std::to_string(c.data.size()) +
                            " samples, header says " + std::to_string(samples));
    }
    w.put_u32(c.clip_id);
    w.put_u32(c.group_id);
    w.put_u8(c.label);
    for (std::size_t k = 0; k < samples; ++k) w.put(static_cast<float>(c.data[k]));
  }
  return w.release();
}

Dataset decode_dataset(const std::string& bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4, "magic") != std::string_view(kMagic, 4)) throw ParseError("bad dataset magic", 0);
  const std::size_t version_at = r.offset();
  if (r.get_u16("version") != kVersion) throw ParseError("unsupported dataset version", version_at);
  Dataset d;
  const std::uint32_t n = r.get_u32("n_clips");
  d.channels = r.get_u32("channels");
  d.timestamps = r.get_u32("timestamps");
  d.sample_rate = r.get_u32("sample_rate");
  d.n_groups = r.get_u32("n_groups");
  if (d.channels == 0 || d.timestamps == 0) throw ParseError("empty clip dimensions", kDatasetHeaderBytes - 12);
  const std::size_t samples = static_cast<std::size_t>(d.channels) * d.timestamps;
  // Guard the reservation against a corrupt count.
  if (static_cast<double>(n) * static_cast<double>(9 + 4 * samples) > static_cast<double>(r.remaining())) {
    r.require(static_cast<std::size_t>(n) * (9 + 4 * samples), "clip records");
  }
  d.clips.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    EegClip c;
    c.clip_id = r.get_u32("clip_id");
    c.group_id = r.get_u32("group_id");
    const std::size_t label_at = r.offset();
    c.label = r.get_u8("label");
    if (c.label > 1) throw ParseError("label must be 0 or 1", label_at);
    c.data = Tensor({d.channels, d.timestamps});
    r.require(4 * samples, "clip samples");
    for (std::size_t k = 0; k < samples; ++k) {
      const std::size_t at = r.offset();
      const float v = r.get<float>("sample");
      if (!std::isfinite(v)) throw ParseError("non-finite sample", at);
      c.data[k] = v;
    }
    d.clips.push_back(std::move(c));
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after last clip", r.offset());
  return d;
}

void write_dataset(const Dataset& d, const std::string& path) { write_file(path, encode_dataset(d)); }

Dataset read_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

}  // namespace iefs
