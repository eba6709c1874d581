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

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "iefs/binary_io.hpp"
#include "iefs/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "iefs_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const auto out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = std::string(IEFS_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string p(const std::string& name) { return (workdir() / name).string(); }

const char* kSmall =
    "n_clips=96\nchannels=4\ntimestamps=64\nn_groups=8\nspike_channels_min=2\nspike_channels_max=3\n"
    "epochs=3\nbatch_size=16\nlr=0.001\nq=2\nblocks=6:5:1:2,8:3:1:2\n";

/// Small dataset plus config, created once.
void ensure_small() {
  static bool done = false;
  if (done) return;
  std::ofstream(p("small.cfg")) << kSmall;
  REQUIRE(run("gen-data --spec " + p("small.cfg") + " --out " + p("small.eegs")).code == 0);
  done = true;
}

}  // namespace

TEST_CASE("gen-data") {
  const auto r = run("gen-data --set n_clips=8 --out " + p("eight.eegs"));
  CHECK(r.code == 0);
  CHECK(r.out == "n=8 c=16 t=250 pos=4\n");
  const auto d = iefs::read_dataset(p("eight.eegs"));
  CHECK(d.channels == 16);
  CHECK(d.timestamps == 250);
  CHECK(d.sample_rate == 250);

  const auto bad = run("gen-data --set class_balance=2 --out " + p("bad.eegs"));
  CHECK(bad.code == 2);
  CHECK_FALSE(bad.err.empty());
  CHECK(run("gen-data --set bogus=1 --out " + p("bad.eegs")).code == 2);
  CHECK(run("gen-data").code == 2);
}

TEST_CASE("train is deterministic and writes every artifact") {
  ensure_small();
  const std::string base = "train --config " + p("small.cfg") + " --data " + p("small.eegs");
  REQUIRE(run(base + " --out " + p("t1")).code == 0);
  REQUIRE(run(base + " --out " + p("t2")).code == 0);
  for (const char* f : {"metrics.csv", "checkpoint.bin", "alpha_trace.csv", "config.resolved"}) {
    INFO(f);
    CHECK(slurp(fs::path(p("t1")) / f) == slurp(fs::path(p("t2")) / f));
  }
  const std::string resolved = slurp(fs::path(p("t1")) / "config.resolved");
  CHECK(resolved.find("lr=0.001\n") != std::string::npos);
  CHECK(resolved.find("weight_decay=0.0001\n") != std::string::npos);
  CHECK(resolved.find("seed=42\n") != std::string::npos);

  REQUIRE(run(base + " --no-fs --out " + p("t_nofs")).code == 0);
  for (const char* f : {"metrics.csv", "checkpoint.bin", "best.bin", "config.resolved"}) {
    INFO(f);
    CHECK(fs::exists(fs::path(p("t_nofs")) / f));
  }
  CHECK(slurp(fs::path(p("t_nofs")) / "config.resolved").find("fs_enabled=false\n") != std::string::npos);

  const auto ev = run("evaluate --checkpoint " + p("t1") + "/checkpoint.bin --data " + p("small.eegs"));
  CHECK(ev.code == 0);
  CHECK(ev.out.rfind("eval: n=96 ", 0) == 0);

  CHECK(run(base + " --set epochs=0 --out " + p("t_bad")).code == 2);
  CHECK(run("train --config " + p("small.cfg") + " --data " + p("missing.eegs") + " --out " + p("t_bad")).code != 0);
  CHECK(run(base + " --set lr=1e300 --out " + p("t_div")).code == 3);
}

TEST_CASE("ablate") {
  ensure_small();
  const std::string base = "--config " + p("small.cfg") + " --data " + p("small.eegs");
  REQUIRE(run("train " + base + " --out " + p("a_ref")).code == 0);
  const auto one = run("ablate " + base + " --grid \"m=0.2\" --out " + p("a1"));
  REQUIRE(one.code == 0);
  const fs::path cell = fs::path(p("a1")) / "q=2_K=1_m=0.2_gamma=0.25";
  for (const char* f : {"metrics.csv", "checkpoint.bin", "alpha_trace.csv", "config.resolved"}) {
    INFO(f);
    CHECK(slurp(cell / f) == slurp(fs::path(p("a_ref")) / f));
  }

  const auto three = run("ablate " + base + " --grid \"m=0,0.2,1\" --out " + p("a3"));
  REQUIRE(three.code == 0);
  const std::string summary = slurp(fs::path(p("a3")) / "summary.csv");
  std::size_t lines = 0;
  for (char ch : summary) lines += ch == '\n';
  CHECK(lines == 4);
  CHECK(summary.rfind("q,K,m,gamma,val_acc,val_f1,val_auroc\n", 0) == 0);
  const auto trace = [&](const char* m) {
    return slurp(fs::path(p("a3")) / (std::string("q=2_K=1_m=") + m + "_gamma=0.25") / "alpha_trace.csv");
  };
  CHECK(trace("0") != trace("0.2"));
  CHECK(trace("0.2") != trace("1"));
  CHECK(trace("0") != trace("1"));

  CHECK(run("ablate " + base + " --grid \"m=\" --out " + p("a_bad")).code == 2);
  CHECK(run("ablate " + base + " --grid \"lr=0.1\" --out " + p("a_bad")).code == 2);
  // A failing cell is recorded and makes the exit status nonzero.
  const auto partial = run("ablate " + base + " --grid \"K=1,500\" --out " + p("a_fail"));
  CHECK(partial.code != 0);
  CHECK(fs::exists(fs::path(p("a_fail")) / "q=2_K=500_m=0.2_gamma=0.25" / "error.txt"));
  CHECK(fs::exists(fs::path(p("a_fail")) / "q=2_K=1_m=0.2_gamma=0.25" / "metrics.csv"));
  CHECK(fs::exists(fs::path(p("a_fail")) / "summary.csv"));
}

TEST_CASE("export-attribution") {
  ensure_small();
  const std::string base = "--config " + p("small.cfg") + " --data " + p("small.eegs");
  REQUIRE(run("train " + base + " --out " + p("x")).code == 0);
  const auto d = iefs::read_dataset(p("small.eegs"));
  const std::string clip = std::to_string(d.clips[3].clip_id);
  const auto ok = run("export-attribution --checkpoint " + p("x") + "/checkpoint.bin --data " + p("small.eegs") +
                      " --clip " + clip + " --out " + p("attr.csv"));
  REQUIRE(ok.code == 0);
  const std::string csv = slurp(p("attr.csv"));
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 64 + 1);
  CHECK(csv.rfind("timestamp,weight\n", 0) == 0);

  const auto missing = run("export-attribution --checkpoint " + p("x") + "/checkpoint.bin --data " +
                           p("small.eegs") + " --clip 999999 --out " + p("attr2.csv"));
  CHECK(missing.code == 2);

  // One iteration per epoch never leaves warmup, so no alpha is frozen.
  REQUIRE(run("train " + base + " --set epochs=1 --set batch_size=96 --out " + p("warm")).code == 0);
  const auto no_alpha = run("export-attribution --checkpoint " + p("warm") + "/checkpoint.bin --data " +
                            p("small.eegs") + " --clip " + clip + " --out " + p("attr3.csv"));
  CHECK(no_alpha.code == 2);
  CHECK(no_alpha.err.find("alpha") != std::string::npos);
}
