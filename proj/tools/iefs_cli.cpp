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

// Command-line front end: corpus generation, training, evaluation, ablation
// sweeps and attribution export.
//
// Exit codes: 0 success, 2 validation/config/parse error, 3 numeric
// divergence, 1 anything else (including I/O failures).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iefs/ablation.hpp"
#include "iefs/binary_io.hpp"
#include "iefs/errors.hpp"
#include "iefs/run_config.hpp"
#include "iefs/synth.hpp"
#include "iefs/training.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitDivergence = 3;

iefs::RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  iefs::RunConfig config;
  if (!path.empty()) config.merge_file(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw iefs::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

void print_metrics(const char* label, const iefs::MetricsReport& m) {
  std::printf("%s: n=%zu acc=%.6f precision=%.6f recall=%.6f f1=%.6f auroc=", label, m.n, m.accuracy,
              m.precision, m.recall, m.f1);
  if (m.auroc) {
    std::printf("%.6f\n", *m.auroc);
  } else {
    std::printf("NA\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-memory-bank entropy feature selection on synthetic EEG"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, checkpoint_path, grid;
  std::vector<std::string> overrides;
  bool no_fs = false;
  std::uint32_t clip_id = 0;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus");
  gen->add_option("--spec", config_path, "Corpus spec (key=value file)");
  gen->add_option("--out", out_path, "Output dataset file")->required();
  gen->add_option("--set", overrides, "Override a key (key=value)");

  auto* tr = app.add_subcommand("train", "Train and write checkpoint, metrics and resolved config");
  tr->add_option("--config", config_path, "Run config (key=value file)");
  tr->add_option("--data", data_path, "Dataset file (overrides the data key)");
  tr->add_option("--out", out_path, "Output directory")->required();
  tr->add_flag("--no-fs", no_fs, "Disable feature selection (baseline)");
  tr->add_option("--set", overrides, "Override a key (key=value)");

  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on a dataset");
  ev->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  ev->add_option("--data", data_path, "Dataset file")->required();

  auto* ab = app.add_subcommand("ablate", "Sweep q, K, m, gamma");
  ab->add_option("--config", config_path, "Base run config (key=value file)");
  ab->add_option("--data", data_path, "Dataset file (overrides the data key)");
  ab->add_option("--grid", grid, "Grid, e.g. \"q=4,8;K=1;m=0,0.2;gamma=0.25\"")->required();
  ab->add_option("--out", out_path, "Output directory")->required();
  ab->add_flag("--no-fs", no_fs, "Disable feature selection");
  ab->add_option("--set", overrides, "Override a key (key=value)");

  auto* ex = app.add_subcommand("export-attribution", "Write per-timestamp feature weights of one clip");
  ex->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  ex->add_option("--data", data_path, "Dataset file")->required();
  ex->add_option("--clip", clip_id, "Clip id")->required();
  ex->add_option("--out", out_path, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*gen) {
      const auto config = load_config(config_path, overrides);
      const auto corpus = iefs::generate(config.corpus);
      iefs::write_dataset(corpus.dataset, out_path);
      const auto& d = corpus.dataset;
      std::printf("n=%zu c=%u t=%u pos=%zu\n", d.size(), d.channels, d.timestamps, d.positives());
    } else if (*tr || *ab) {
      auto config = load_config(config_path, overrides);
      if (!data_path.empty()) config.data_path = data_path;
      if (no_fs) config.train.fs_enabled = false;
      if (*tr) {
        const auto outcome = iefs::run_experiment(config, out_path);
        for (auto it = outcome.result.log.rbegin(); it != outcome.result.log.rend(); ++it) {
          if (it->split == "val") {
            print_metrics("val", it->metrics);
            break;
          }
        }
        if (outcome.test) print_metrics("test", outcome.test->metrics);
      } else {
        const auto rows = iefs::run_ablation(config, iefs::parse_grid(grid), out_path, std::cerr);
        std::fputs(iefs::ablation_summary_csv(rows).c_str(), stdout);
        for (const auto& r : rows) {
          if (!r.ok) return 1;
        }
      }
    } else if (*ev) {
      const auto checkpoint = iefs::load_checkpoint(checkpoint_path);
      const auto result = iefs::evaluate(checkpoint, iefs::read_dataset(data_path));
      print_metrics("eval", result.metrics);
    } else if (*ex) {
      const auto checkpoint = iefs::load_checkpoint(checkpoint_path);
      const auto data = iefs::read_dataset(data_path);
      const auto map = iefs::attribute_clip(checkpoint, data.find(clip_id));
      std::ofstream out(out_path, std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + out_path);
      iefs::write_attribution_csv(map, out);
    }
  } catch (const iefs::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const iefs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const iefs::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const iefs::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const iefs::DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
