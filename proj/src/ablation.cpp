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

#include "iefs/ablation.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "iefs/binary_io.hpp"
#include "iefs/errors.hpp"

namespace iefs {

namespace {

const std::vector<std::string> kGridKeys{"q", "K", "m", "gamma"};

std::string cell_name(const RunConfig& c) {
  return "q=" + c.get("q") + "_K=" + c.get("K") + "_m=" + c.get("m") + "_gamma=" + c.get("gamma");
}

}  // namespace

ExperimentOutcome run_experiment(const RunConfig& config, const std::string& out_dir) {
  if (config.data_path.empty()) throw ConfigError("no dataset path given");
  const Dataset data = read_dataset(config.data_path);
  TrainConfig tc = config.train;
  tc.encoder.in_channels = data.channels;
  tc.encoder.clip_len = data.timestamps;
  tc.validate();
  const DatasetSplit parts = split(data, config.split, config.split_by_group, tc.seed);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_file((dir / "config.resolved").string(), config.resolved());

  ExperimentOutcome out;
  out.result = train(tc, parts.train, parts.val);
  const Checkpoint& final_state = out.result.checkpoint;
  save_checkpoint(final_state, (dir / "checkpoint.bin").string());
  if (out.result.best) save_checkpoint(*out.result.best, (dir / "best.bin").string());

  std::string csv = metrics_csv_header();
  for (const auto& r : out.result.log) csv += metrics_csv_row(r);
  if (!parts.test.clips.empty() && (!tc.fs_enabled || final_state.frozen_alpha)) {
    out.test = evaluate(final_state, parts.test);
    csv += metrics_csv_row({tc.epochs, "test", out.test->loss, out.test->metrics});
  }
  write_file((dir / "metrics.csv").string(), csv);
  write_file((dir / "alpha_trace.csv").string(), alpha_trace_csv(out.result.alpha_trace));
  return out;
}

std::vector<GridAxis> parse_grid(const std::string& grid) {
  std::map<std::string, GridAxis> axes;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("grid entry '" + item + "' is not key=values");
    GridAxis axis;
    std::stringstream ks(item.substr(0, eq));
    ks >> axis.key;
    if (std::find(kGridKeys.begin(), kGridKeys.end(), axis.key) == kGridKeys.end()) {
      throw ConfigError("grid key '" + axis.key + "' is not one of q, K, m, gamma");
    }
    if (axes.count(axis.key)) throw ConfigError("grid key '" + axis.key + "' repeated");
    std::stringstream vs(item.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) {
      std::stringstream trimmed(v);
      std::string token;
      trimmed >> token;
      if (token.empty()) throw ConfigError("empty value in grid entry '" + item + "'");
      RunConfig probe;
      probe.set(axis.key, token);
      probe.train.gmb.validate();
      axis.values.push_back(probe.get(axis.key));
    }
    if (axis.values.empty()) throw ConfigError("grid entry '" + item + "' lists no values");
    axes.emplace(axis.key, std::move(axis));
  }
  if (axes.empty()) throw ConfigError("empty ablation grid");
  std::vector<GridAxis> ordered;
  for (const auto& key : kGridKeys) {
    if (auto it = axes.find(key); it != axes.end()) ordered.push_back(it->second);
  }
  return ordered;
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const std::vector<GridAxis>& grid,
                                      const std::string& out_dir, std::ostream& log) {
  std::vector<RunConfig> cells{base};
  for (const auto& axis : grid) {
    std::vector<RunConfig> next;
    for (const auto& c : cells) {
      for (const auto& v : axis.values) {
        RunConfig copy = c;
        copy.set(axis.key, v);
        next.push_back(std::move(copy));
      }
    }
    cells = std::move(next);
  }

  std::filesystem::create_directories(out_dir);
  std::vector<AblationRow> rows;
  for (const auto& cell : cells) {
    AblationRow row{cell.get("q"), cell.get("K"), cell.get("m"), cell.get("gamma"), cell_name(cell), false, {}, 0.0, 0.0, std::nullopt};
    const std::string dir = (std::filesystem::path(out_dir) / row.cell_dir).string();
    try {
      const auto outcome = run_experiment(cell, dir);
      const auto& log_rows = outcome.result.log;
      auto last_val = std::find_if(log_rows.rbegin(), log_rows.rend(), [](const EpochRecord& r) { return r.split == "val"; });
      if (last_val == log_rows.rend()) throw ConfigError("no validation metrics recorded");
      row.ok = true;
      row.val_acc = last_val->metrics.accuracy;
      row.val_f1 = last_val->metrics.f1;
      row.val_auroc = last_val->metrics.auroc;
      log << row.cell_dir << ": val_acc=" << row.val_acc << "\n";
    } catch (const std::exception& e) {
      row.error = e.what();
      std::filesystem::create_directories(dir);
      write_file((std::filesystem::path(dir) / "error.txt").string(), row.error + "\n");
      log << row.cell_dir << ": FAILED: " << row.error << "\n";
    }
    rows.push_back(std::move(row));
  }
  write_file((std::filesystem::path(out_dir) / "summary.csv").string(), ablation_summary_csv(rows));
  return rows;
}

std::string ablation_summary_csv(const std::vector<AblationRow>& rows) {
  std::string out = "q,K,m,gamma,val_acc,val_f1,val_auroc\n";
  char buf[128];
  for (const auto& r : rows) {
    out += r.q + "," + r.k + "," + r.m + "," + r.gamma + ",";
    if (!r.ok) {
      out += "NA,NA,NA\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,", r.val_acc, r.val_f1);
    out += buf;
    if (r.val_auroc) {
      std::snprintf(buf, sizeof buf, "%.6f\n", *r.val_auroc);
      out += buf;
    } else {
      out += "NA\n";
    }
  }
  return out;
}

}  // namespace iefs
