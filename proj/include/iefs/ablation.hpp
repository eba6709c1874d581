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

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "iefs/run_config.hpp"
#include "iefs/training.hpp"

namespace iefs {

struct ExperimentOutcome {
  TrainResult result;
  std::optional<EvalResult> test;  // absent for an empty test split or no frozen alpha
};

/// Reads the dataset named by `config.data_path`, splits it, trains, and
/// writes into `out_dir` (created if missing): checkpoint.bin, best.bin,
/// metrics.csv (train/val per epoch plus a final test row), alpha_trace.csv
/// and config.resolved.
ExperimentOutcome run_experiment(const RunConfig& config, const std::string& out_dir);

/// One hyperparameter axis of an ablation grid.
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses `q=4,8;K=1;m=0,0.2;gamma=0.25`. Keys are limited to q, K, m and
/// gamma, each at most once; axes come back in that canonical order.
std::vector<GridAxis> parse_grid(const std::string& grid);

struct AblationRow {
  std::string q, k, m, gamma;
  std::string cell_dir;
  bool ok = false;
  std::string error;
  double val_acc = 0.0;
  double val_f1 = 0.0;
  std::optional<double> val_auroc;
};

/// Runs every grid cell in order (first axis outermost), each into its own
/// subdirectory of `out_dir`, and writes summary.csv. A failing cell is
/// recorded and the sweep continues.
std::vector<AblationRow> run_ablation(const RunConfig& base, const std::vector<GridAxis>& grid,
                                      const std::string& out_dir, std::ostream& log);

/// `q,K,m,gamma,val_acc,val_f1,val_auroc`, NA for failed cells.
std::string ablation_summary_csv(const std::vector<AblationRow>& rows);

}  // namespace iefs
