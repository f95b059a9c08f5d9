// Copyright 2026 The Auralab Authors.
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "auralab/cli.hpp"
#include "auralab/config.hpp"
#include "auralab/image.hpp"
#include "auralab/report.hpp"
#include "testutil.hpp"

#include "json.hpp"

using namespace auralab;
using namespace testutil;

namespace {

int run_cli(std::initializer_list<std::string> args) {
  std::vector<const char*> argv = {"auralab"};
  std::vector<std::string> hold(args);
  for (const auto& a : hold) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("toml subset parses sections, arrays, comments, and strings") {
  nlohmann::json doc = parse_toml(R"(
# top comment
root_seed = 11

[dataset]
kind = "esc50"           # trailing comment
root = "/data/esc-50"

[train]
lr = 1e-4
epochs = 70
lr_drop_epochs = [30, 60]
decoupled_weight_decay = false
)");
  CHECK(doc["root_seed"] == 11);
  CHECK(doc["dataset"]["kind"] == "esc50");
  CHECK(doc["train"]["lr"] == doctest::Approx(1e-4));
  CHECK(doc["train"]["lr_drop_epochs"] == nlohmann::json::array({30, 60}));
  CHECK(doc["train"]["decoupled_weight_decay"] == false);

  CHECK_THROWS_AS(parse_toml("key value\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[unclosed\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("x = \"unterminated\n"), ConfigError);
}

TEST_CASE("defaults follow the training protocol") {
  ExperimentConfig cfg = parse_and_validate(std::nullopt, {{"dataset.kind", "\"esc50\""}});
  CHECK(cfg.train.base_lr == 1e-4);
  CHECK(cfg.train.weight_decay == 1e-3);
  CHECK(cfg.train.batch_size == 32);
  CHECK(cfg.train.epochs == 70);
  CHECK(cfg.train.lr_drop_epochs == std::vector<int>{30, 60});
  CHECK(cfg.augment);  // augmentation defaults on for esc50 only
  CHECK(cfg.mel_scale == MelScale::kSlaney);
  CHECK(cfg.variance_keep == 0.99);
  CHECK(cfg.ig_steps == 50);

  ExperimentConfig gtzan = parse_and_validate(std::nullopt, {{"dataset.kind", "\"gtzan\""}});
  CHECK(!gtzan.augment);
}

TEST_CASE("scratch regime brings the 450-epoch schedule") {
  ExperimentConfig cfg = parse_and_validate(
      std::nullopt, {{"train.regime", "\"scratch\""}, {"train.epochs", "450"}});
  CHECK(cfg.train.epochs == 450);
  CHECK(cfg.train.lr_drop_epochs == std::vector<int>{300, 350});
  // Random init implies the scratch schedule even without the flag.
  ExperimentConfig random_cfg = parse_and_validate(std::nullopt, {{"model.init", "\"random\""}});
  CHECK(random_cfg.train.epochs == 450);
  CHECK(random_cfg.train.lr_drop_epochs == std::vector<int>{300, 350});
}

TEST_CASE("unknown keys are rejected by name") {
  fs::path dir = fresh_dir("cfg_unknown");
  write_text_file(dir / "bad.toml", "[train]\nlearning_rte = 1e-4\n");
  try {
    parse_and_validate(dir / "bad.toml", {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("learning_rte") != std::string::npos);
  }
}

TEST_CASE("type mismatches name the key") {
  fs::path dir = fresh_dir("cfg_type");
  write_text_file(dir / "bad.toml", "[train]\nepochs = \"seventy\"\n");
  try {
    parse_and_validate(dir / "bad.toml", {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("train.epochs") != std::string::npos);
  }
}

TEST_CASE("invariant violations are configuration errors") {
  CHECK_THROWS_AS(parse_and_validate(std::nullopt, {{"ensemble.members", "1"}}), ConfigError);
  CHECK_THROWS_AS(parse_and_validate(std::nullopt, {{"analysis.variance_keep", "1.5"}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_and_validate(std::nullopt, {{"dsp.stretch_rates", "[0.1]"}}), ConfigError);
  CHECK_THROWS_AS(parse_and_validate(std::nullopt, {{"train.lr_drop_epochs", "[60, 30]"}}),
                  ConfigError);
}

TEST_CASE("resolved config round-trips through its TOML echo") {
  ExperimentConfig cfg = parse_and_validate(
      std::nullopt, {{"dataset.kind", "\"gtzan\""},
                     {"dataset.root", "\"/data/gtzan\""},
                     {"train.epochs", "9"},
                     {"train.lr_drop_epochs", "[3, 6]"},
                     {"root_seed", "77"}});
  fs::path dir = fresh_dir("cfg_roundtrip");
  write_text_file(dir / "echo.toml", cfg.to_toml());
  ExperimentConfig back = parse_and_validate(dir / "echo.toml", {});
  CHECK(back.dataset == cfg.dataset);
  CHECK(back.root_seed == cfg.root_seed);
  CHECK(back.train.epochs == cfg.train.epochs);
  CHECK(back.train.lr_drop_epochs == cfg.train.lr_drop_epochs);
  CHECK(back.out_dir == cfg.out_dir);
  CHECK(back.to_toml() == cfg.to_toml());
}

TEST_CASE("json configs are accepted") {
  fs::path dir = fresh_dir("cfg_json");
  write_text_file(dir / "cfg.json",
                  R"({"dataset": {"kind": "urbansound8k"}, "train": {"epochs": 5,
                      "lr_drop_epochs": [2]}, "root_seed": 3})");
  ExperimentConfig cfg = parse_and_validate(dir / "cfg.json", {});
  CHECK(cfg.dataset == DatasetKind::kUrbanSound8k);
  CHECK(cfg.train.epochs == 5);
  CHECK(cfg.root_seed == 3);
}

// ---------------------------------------------------------------------------
// report emitters
// ---------------------------------------------------------------------------

namespace {

void fake_run(const fs::path& runs_dir, const std::string& run_id, const std::string& dataset,
              const std::string& arch, const std::string& init, double acc) {
  nlohmann::json j;
  j["run_id"] = run_id;
  j["dataset"] = dataset;
  j["architecture"] = arch;
  j["init_mode"] = init;
  j["final_val_accuracy"] = acc;
  j["config"] = nlohmann::json::object();
  j["epochs"] = nlohmann::json::array();
  fs::create_directories(runs_dir / run_id);
  write_text_file(runs_dir / run_id / "record.json", j.dump(2));
}

}  // namespace

TEST_CASE("report reproduces the published pretrained-vs-random table verbatim") {
  fs::path runs = fresh_dir("report_runs");
  struct Cell {
    const char* arch;
    const char* dataset;
    const char* init;
    double acc;
  };
  // The published accuracy grid, as fractions.
  const Cell cells[] = {
      {"densenet201", "gtzan", "pretrained", 0.9139}, {"densenet201", "gtzan", "random", 0.8850},
      {"densenet201", "esc50", "pretrained", 0.9116}, {"densenet201", "esc50", "random", 0.7250},
      {"densenet201", "urbansound8k", "pretrained", 0.8514},
      {"densenet201", "urbansound8k", "random", 0.7632},
      {"resnet50", "gtzan", "pretrained", 0.9109},    {"resnet50", "gtzan", "random", 0.8790},
      {"resnet50", "esc50", "pretrained", 0.9065},    {"resnet50", "esc50", "random", 0.6740},
      {"resnet50", "urbansound8k", "pretrained", 0.8476},
      {"resnet50", "urbansound8k", "random", 0.7326},
      {"inceptionv3", "gtzan", "pretrained", 0.9000}, {"inceptionv3", "gtzan", "random", 0.8630},
      {"inceptionv3", "esc50", "pretrained", 0.8734}, {"inceptionv3", "esc50", "random", 0.6450},
      {"inceptionv3", "urbansound8k", "pretrained", 0.8437},
      {"inceptionv3", "urbansound8k", "random", 0.7524},
  };
  int i = 0;
  for (const Cell& c : cells) {
    fake_run(runs, "run" + std::to_string(i++), c.dataset, c.arch, c.init, c.acc);
  }
  std::string csv = table1_csv(collect_run_summaries(runs));
  CHECK(csv.find("model,gtzan_pretrained,gtzan_random,esc50_pretrained,esc50_random,"
                 "urbansound8k_pretrained,urbansound8k_random") == 0);
  CHECK(csv.find("densenet201,91.39,88.50,91.16,72.50,85.14,76.32") != std::string::npos);
  CHECK(csv.find("resnet50,91.09,87.90,90.65,67.40,84.76,73.26") != std::string::npos);
  CHECK(csv.find("inceptionv3,90.00,86.30,87.34,64.50,84.37,75.24") != std::string::npos);
}

TEST_CASE("report averages multiple folds into one cell") {
  fs::path runs = fresh_dir("report_folds");
  fake_run(runs, "f1", "esc50", "densenet201", "pretrained", 0.90);
  fake_run(runs, "f2", "esc50", "densenet201", "pretrained", 0.92);
  std::string csv = table1_csv(collect_run_summaries(runs));
  CHECK(csv.find("densenet201,91.00,") != std::string::npos);
}

TEST_CASE("ensemble table reports single mean, std, and ensemble accuracy") {
  fs::path dir = fresh_dir("report_ens");
  nlohmann::json j;
  j["dataset"] = "esc50";
  j["architecture"] = "densenet201";
  j["member_accuracies"] = {0.9080, 0.9116, 0.9152};
  j["ensemble_accuracy"] = 0.9289;
  fs::create_directories(dir / "e1");
  write_text_file(dir / "e1" / "summary.json", j.dump(2));
  std::string csv = table2_csv(collect_ensemble_summaries(dir));
  CHECK(csv.find("model,esc50_single_mean,esc50_single_std,esc50_ensemble") == 0);
  CHECK(csv.find("densenet201,91.16,0.36,92.89") != std::string::npos);
}

TEST_CASE("analysis figure rolls every curve csv into one plot") {
  fs::path dir = fresh_dir("report_fig");
  write_text_file(dir / "fusion.csv",
                  "cut_point,val_accuracy,run_id\nstem,0.5,a\nblock1,0.7,b\nblock4,0.9,c\n");
  write_text_file(dir / "freeze.csv",
                  "cut_point,val_accuracy,run_id\nstem,0.9,d\nblock1,0.8,e\nblock4,0.4,f\n");
  fs::path png = dir / "fig.png";
  CHECK(emit_analysis_figure(dir, png));
  Image img = read_png(png);
  CHECK(img.width > 100);
  CHECK(img.height > 100);
  CHECK(!emit_analysis_figure(fresh_dir("report_fig_empty"), png));
}

// ---------------------------------------------------------------------------
// cli surface
// ---------------------------------------------------------------------------

TEST_CASE("cli exit codes: configuration errors are 2, runtime failures 1") {
  fs::path out = fresh_dir("cli_out");
  // Unknown config key.
  fs::path bad = fresh_dir("cli_cfg") / "bad.toml";
  write_text_file(bad, "[train]\nlearning_rte = 1.0\n");
  CHECK(run_cli({"train", "--config", bad.string(), "--out", out.string()}) == 2);
  // Training before prep names the missing store.
  CHECK(run_cli({"train", "--dataset", "tones", "--init", "random", "--arch", "tiny", "--out",
                 out.string()}) == 1);
  // Unknown flag.
  CHECK(run_cli({"train", "--no-such-flag", "1"}) == 2);
}

TEST_CASE("cli pipeline on the synthetic tone corpus") {
  fs::path data = fresh_dir("cli_tones_data");
  fs::path out = fresh_dir("cli_tones_out");
  CHECK(run_cli({"synth-tones", "--out", data.string(), "--classes", "2", "--clips-per-class",
                 "10", "--seconds", "0.5"}) == 0);
  CHECK(run_cli({"prep", "--dataset", "tones", "--data-root", data.string(), "--out",
                 out.string()}) == 0);
  CHECK(fs::exists(out / "features" / "tones" / "store.json"));
  CHECK(fs::exists(out / "features" / "tones" / "config.toml"));

  CHECK(run_cli({"train", "--dataset", "tones", "--data-root", data.string(), "--arch", "tiny",
                 "--init", "random", "--regime", "pretrained70", "--epochs", "1", "--batch-size",
                 "8", "--out", out.string(), "--seed", "4"}) == 0);
  // The run directory carries the resolved config and the checkpoint.
  bool found_run = false;
  for (const auto& entry : fs::directory_iterator(out / "runs")) {
    if (fs::exists(entry.path() / "record.json")) {
      CHECK(fs::exists(entry.path() / "config.toml"));
      CHECK(fs::exists(entry.path() / "metrics.csv"));
      CHECK(fs::exists(entry.path() / "checkpoint" / "weights.bin"));
      found_run = true;
    }
  }
  CHECK(found_run);

  CHECK(run_cli({"report", "--out", out.string()}) == 0);
  CHECK(fs::exists(out / "report" / "table1.csv"));
  std::string table = read_text_file(out / "report" / "table1.csv");
  CHECK(table.find("tones_random") != std::string::npos);
  CHECK(table.find("tiny,") != std::string::npos);
}

TEST_CASE("cli analyze and ensemble emit their artifacts") {
  fs::path data = fresh_dir("cli_an_data");
  fs::path out = fresh_dir("cli_an_out");
  REQUIRE(run_cli({"synth-tones", "--out", data.string(), "--classes", "2", "--clips-per-class",
                   "10", "--seconds", "0.5"}) == 0);
  REQUIRE(run_cli({"prep", "--dataset", "tones", "--data-root", data.string(), "--out",
                   out.string()}) == 0);

  // A tiny "pretrained" archive produced by a brief scratch run.
  REQUIRE(run_cli({"train", "--dataset", "tones", "--arch", "tiny", "--init", "random",
                   "--epochs", "1", "--batch-size", "8", "--out", out.string(), "--seed", "1"}) ==
          0);
  fs::path run_dir;
  for (const auto& entry : fs::directory_iterator(out / "runs"))
    if (fs::exists(entry.path() / "record.json")) run_dir = entry.path();
  REQUIRE(!run_dir.empty());
  fs::path archive = run_dir / "checkpoint";
  std::string run_id = run_dir.filename().string();

  // analyze ig: one PNG plus one JSON residual record.
  FeatureStore store = open_feature_store(out / "features" / "tones");
  std::string clip = store.records.begin()->second.clip_id;
  REQUIRE(run_cli({"analyze", "ig", "--dataset", "tones", "--out", out.string(), "--run", run_id,
                   "--clip", clip, "--ig-steps", "8"}) == 0);
  CHECK(fs::exists(out / "analysis" / ("ig_" + clip + ".png")));
  CHECK(fs::exists(out / "analysis" / ("ig_" + clip + ".json")));
  CHECK(fs::exists(out / "analysis" / "config.toml"));

  // analyze svcca: per-segment curve csv.
  REQUIRE(run_cli({"analyze", "svcca", "--dataset", "tones", "--out", out.string(), "--run",
                   run_id, "--archive", archive.string()}) == 0);
  std::string svcca_csv = read_text_file(out / "analysis" / "svcca.csv");
  CHECK(svcca_csv.find("segment,mean_correlation,run_id") == 0);
  CHECK(svcca_csv.find("block4") != std::string::npos);

  // analyze fusion: curve csv + png, runs persisted.
  REQUIRE(run_cli({"analyze", "fusion", "--dataset", "tones", "--out", out.string(), "--arch",
                   "tiny", "--archive", archive.string(), "--epochs", "1", "--batch-size", "8"}) ==
          0);
  CHECK(fs::exists(out / "analysis" / "fusion.csv"));
  CHECK(fs::exists(out / "analysis" / "fusion.png"));

  // ensemble: descriptor, report csv, summary, echoed config.
  REQUIRE(run_cli({"ensemble", "--dataset", "tones", "--arch", "tiny", "--init", "random",
                   "--members", "2", "--epochs", "1", "--batch-size", "8", "--out", out.string(),
                   "--seed", "9"}) == 0);
  bool found_ens = false;
  for (const auto& entry : fs::directory_iterator(out / "ensembles")) {
    if (fs::exists(entry.path() / "descriptor.json")) {
      CHECK(fs::exists(entry.path() / "report.csv"));
      CHECK(fs::exists(entry.path() / "summary.json"));
      CHECK(fs::exists(entry.path() / "config.toml"));
      found_ens = true;
    }
  }
  CHECK(found_ens);

  // report picks up runs, ensembles, and curves.
  REQUIRE(run_cli({"report", "--out", out.string()}) == 0);
  CHECK(fs::exists(out / "report" / "table1.csv"));
  CHECK(fs::exists(out / "report" / "table2.csv"));
  CHECK(fs::exists(out / "report" / "fig2.png"));
}

TEST_CASE("the dataset root falls back to the environment variable") {
  fs::path data = fresh_dir("cli_env_data");
  fs::path out = fresh_dir("cli_env_out");
  REQUIRE(run_cli({"synth-tones", "--out", (data / "tones").string(), "--classes", "2",
                   "--clips-per-class", "6", "--seconds", "0.5"}) == 0);
  setenv("AURALAB_DATA_ROOT", data.c_str(), 1);
  CHECK(run_cli({"prep", "--dataset", "tones", "--out", out.string()}) == 0);
  unsetenv("AURALAB_DATA_ROOT");
  CHECK(fs::exists(out / "features" / "tones" / "store.json"));
}

TEST_CASE("the output directory lock excludes concurrent runs") {
  fs::path dir = fresh_dir("lock_dir");
  DirLock first(dir);
  CHECK_THROWS_AS(DirLock{dir}, IoError);
  // A stale lock from a dead process is reclaimed.
  fs::path dir2 = fresh_dir("lock_dir2");
  write_text_file(dir2 / ".lock", "999999999\n");
  DirLock reclaimed(dir2);
}

TEST_CASE("import-weights converts an npy directory") {
  fs::path npy = fresh_dir("cli_npy");
  // one float32 tensor, v1.0 header
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (3,), }";
  while ((10 + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  std::string body = "\x93NUMPY";
  body += '\x01';
  body += '\x00';
  body += static_cast<char>(header.size() & 0xff);
  body += static_cast<char>((header.size() >> 8) & 0xff);
  body += header;
  float vals[3] = {1.0f, 2.0f, 3.0f};
  body.append(reinterpret_cast<const char*>(vals), sizeof(vals));
  write_binary_file(npy / "classifier.fc.weight.npy", body.data(), body.size());

  fs::path archive = fresh_dir("cli_npy_archive");
  CHECK(run_cli({"import-weights", "--npy-dir", npy.string(), "--out", archive.string(),
                 "--provenance", "unit"}) == 0);
  WeightArchive a = load_archive(archive);
  CHECK(a.provenance == "unit");
  CHECK(a.tensors.at("classifier.fc.weight").data == std::vector<float>{1, 2, 3});
}
