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

#include <cmath>

#include "auralab/train.hpp"
#include "testutil.hpp"

using namespace auralab;
using namespace testutil;

namespace {

TrainConfig quick_config(int epochs, uint64_t seed) {
  TrainConfig cfg = default_train_config(Regime::kPretrained70);
  cfg.epochs = epochs;
  cfg.lr_drop_epochs = {};
  cfg.base_lr = 1e-3;
  cfg.batch_size = 16;
  cfg.seed = seed;
  return cfg;
}

uint64_t model_checksum(ModelHandle& m) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (nn::Param<float>* p : m.net().params())
    h = fnv1a(p->value.v.data(), p->value.v.size() * sizeof(float), h);
  return h;
}

}  // namespace

TEST_CASE("learning-rate schedule reproduces the two published regimes") {
  TrainConfig pre = default_train_config(Regime::kPretrained70);
  CHECK(pre.base_lr == 1e-4);
  CHECK(pre.weight_decay == 1e-3);
  CHECK(pre.batch_size == 32);
  CHECK(pre.epochs == 70);
  CHECK(scheduled_lr(0, pre) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(scheduled_lr(29, pre) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(scheduled_lr(30, pre) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(scheduled_lr(59, pre) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(scheduled_lr(60, pre) == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(scheduled_lr(69, pre) == doctest::Approx(1e-6).epsilon(1e-12));

  TrainConfig scratch = default_train_config(Regime::kScratch450);
  CHECK(scratch.epochs == 450);
  CHECK(scheduled_lr(299, scratch) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(scheduled_lr(300, scratch) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(scheduled_lr(349, scratch) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(scheduled_lr(350, scratch) == doctest::Approx(1e-6).epsilon(1e-12));

  CHECK_THROWS_AS(scheduled_lr(-1, pre), DomainError);
  CHECK_THROWS_AS(scheduled_lr(70, pre), DomainError);
}

TEST_CASE("schedule is non-increasing with exactly |drops| drops") {
  TrainConfig cfg = default_train_config(Regime::kPretrained70);
  int drops = 0;
  double prev = scheduled_lr(0, cfg);
  for (int e = 1; e < cfg.epochs; ++e) {
    double lr = scheduled_lr(e, cfg);
    CHECK(lr <= prev);
    if (lr < prev) ++drops;
    prev = lr;
  }
  CHECK(drops == 2);
}

TEST_CASE("train config validation") {
  TrainConfig cfg = default_train_config(Regime::kPretrained70);
  cfg.lr_drop_epochs = {30, 30};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.lr_drop_epochs = {30, 80};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_train_config(Regime::kPretrained70);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("metrics from predictions") {
  SUBCASE("perfect classifier") {
    std::vector<int> labels = {0, 1, 2, 1, 0};
    Metrics m = metrics_from_predictions(labels, labels, 3);
    CHECK(m.accuracy == 1.0);
    for (int c = 0; c < 3; ++c)
      for (int p = 0; p < 3; ++p)
        CHECK(m.confusion[c][p] == (c == p ? (c == 0 ? 2 : (c == 1 ? 2 : 1)) : 0));
  }
  SUBCASE("uniform random 50-class predictor sits near chance") {
    Rng rng(77);
    std::vector<int> labels(4000), preds(4000);
    for (auto& v : labels) v = static_cast<int>(rng.below(50));
    for (auto& v : preds) v = static_cast<int>(rng.below(50));
    Metrics m = metrics_from_predictions(labels, preds, 50);
    CHECK(m.accuracy == doctest::Approx(0.02).epsilon(0.5));  // binomial noise band
  }
  SUBCASE("confusion row sums equal class supports") {
    Rng rng(78);
    std::vector<int> labels(500), preds(500);
    for (auto& v : labels) v = static_cast<int>(rng.below(7));
    for (auto& v : preds) v = static_cast<int>(rng.below(7));
    Metrics m = metrics_from_predictions(labels, preds, 7);
    std::vector<int> support(7, 0);
    for (int v : labels) ++support[v];
    for (int c = 0; c < 7; ++c) {
      int row = 0;
      for (int p = 0; p < 7; ++p) row += m.confusion[c][p];
      CHECK(row == support[c]);
    }
    int trace = 0, total = 0;
    for (int c = 0; c < 7; ++c) {
      trace += m.confusion[c][c];
      for (int p = 0; p < 7; ++p) total += m.confusion[c][p];
    }
    CHECK(m.accuracy == doctest::Approx(static_cast<double>(trace) / total).epsilon(1e-12));
  }
  SUBCASE("empty input is a domain error") {
    CHECK_THROWS_AS(metrics_from_predictions({}, {}, 2), DomainError);
  }
}

TEST_CASE("training is deterministic and loss decreases") {
  ToneFixture f = make_tone_fixture("train_det", 2, 8);
  FoldPlan plan = split_folds(f.manifest, 1);

  ModelHandle m1 = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 42);
  RunRecord r1 = train_model(m1, f.store, plan, quick_config(3, 7));
  ModelHandle m2 = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 42);
  RunRecord r2 = train_model(m2, f.store, plan, quick_config(3, 7));

  CHECK(r1.epochs[0].train_loss == r2.epochs[0].train_loss);
  CHECK(r1.final_val_accuracy == r2.final_val_accuracy);
  CHECK(model_checksum(m1) == model_checksum(m2));
  CHECK(static_cast<int>(r1.epochs.size()) == 3);
  CHECK(r1.epochs.back().train_loss < r1.epochs.front().train_loss);
}

TEST_CASE("evaluation mutates nothing and rejects augmented records") {
  ToneFixture f = make_tone_fixture("eval_fix", 2, 6, /*augmented=*/true);
  FoldPlan plan = split_folds(f.manifest, 1);
  ModelHandle m = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 9);
  uint64_t before = model_checksum(m);
  Metrics metrics = evaluate_model(m, f.store, plan.val_ids);
  CHECK(model_checksum(m) == before);
  CHECK(metrics.total() == static_cast<int>(plan.val_ids.size()));

  CHECK_THROWS_AS(evaluate_model(m, f.store, {}), DomainError);
  std::string aug_name = f.manifest.entries[0].clip_id + ".aug-0";
  REQUIRE(f.store.records.count(aug_name) == 1);
  CHECK_THROWS_AS(evaluate_model(m, f.store, {aug_name}), DomainError);
}

TEST_CASE("checkpoint reproduces the recorded final accuracy exactly") {
  ToneFixture f = make_tone_fixture("ckpt_fix", 2, 6);
  FoldPlan plan = split_folds(f.manifest, 1);
  ModelHandle m = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 10);
  RunRecord rec = train_model(m, f.store, plan, quick_config(2, 11));
  rec.run_id = "ckpt-test";
  fs::path run_dir = fresh_dir("ckpt_run");
  persist_run(rec, m, run_dir);
  CHECK(fs::exists(run_dir / "record.json"));
  CHECK(fs::exists(run_dir / "metrics.csv"));
  CHECK(fs::exists(run_dir / "checkpoint" / "archive.json"));

  RunRecord loaded = load_run_record(run_dir);
  CHECK(loaded.final_val_accuracy == rec.final_val_accuracy);
  CHECK(loaded.epochs.size() == rec.epochs.size());

  WeightArchive ckpt = load_archive(run_dir / "checkpoint");
  ModelHandle fresh = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 999);
  load_into_model(ckpt, fresh.net(), [](const std::string&) { return true; });
  Metrics metrics = evaluate_model(fresh, f.store, plan.val_ids);
  CHECK(metrics.accuracy == rec.final_val_accuracy);
}

TEST_CASE("augmented records are used for training only when enabled") {
  ToneFixture f = make_tone_fixture("augtrain", 2, 6, /*augmented=*/true);
  FoldPlan plan = split_folds(f.manifest, 1);
  TrainConfig cfg = quick_config(1, 3);
  cfg.include_augmented = true;
  ModelHandle m = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 1);
  RunRecord rec = train_model(m, f.store, plan, cfg);
  // Loss averages over base + 4 augmented copies of each training clip.
  size_t train_clips = plan.train_ids.size();
  CHECK(rec.epochs[0].train_accuracy >= 0.0);
  (void)train_clips;

  cfg.include_augmented = false;
  ModelHandle m2 = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 1);
  RunRecord rec2 = train_model(m2, f.store, plan, cfg);
  // Different effective dataset sizes make the epoch losses differ.
  CHECK(rec.epochs[0].train_loss != rec2.epochs[0].train_loss);
}

TEST_CASE("adam optimizer leaves weights alone at lr zero") {
  ModelHandle m = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 5);
  auto x = nn::Tensor<float>({2, 3, 64, 32});
  Rng rng(2);
  for (auto& v : x.v) v = static_cast<float>(rng.gaussian());
  const auto& logits = m.net().forward(x, true);
  nn::Tensor<float> dlogits;
  nn::softmax_xent<float>(logits, {0, 1}, &dlogits);
  m.net().zero_grad();
  m.net().backward(dlogits);
  uint64_t before = model_checksum(m);
  AdamOptimizer opt(m.net().trainable_params(), 1e-3, false);
  opt.step(0.0);
  CHECK(model_checksum(m) == before);
}

TEST_CASE("cross validation runs one fold per official fold") {
  ToneFixture f = make_tone_fixture("cv_fix", 2, 10);
  TrainConfig cfg = quick_config(1, 21);
  fs::path runs = fresh_dir("cv_runs");
  CrossValResult result =
      cross_validate(Architecture::kTiny, InitMode::kRandom, nullptr, f.store, cfg, 7, runs);
  CHECK(result.runs.size() == 5);
  CHECK(result.complete);
  double sum = 0.0;
  for (const auto& r : result.runs) sum += r.final_val_accuracy;
  CHECK(result.mean_accuracy == doctest::Approx(sum / 5.0).epsilon(1e-9));
  for (const auto& r : result.runs) CHECK(fs::exists(runs / r.run_id / "record.json"));

  // Across folds, every clip validates exactly once.
  std::map<std::string, int> seen;
  for (int fold = 1; fold <= 5; ++fold)
    for (const auto& id : store_fold_plan(f.store, fold).val_ids) ++seen[id];
  CHECK(seen.size() == 20);
  for (const auto& [id, n] : seen) CHECK(n == 1);
}

TEST_CASE("divergence aborts with the failing epoch recorded") {
  ToneFixture f = make_tone_fixture("diverge_fix", 2, 4);
  FoldPlan plan = split_folds(f.manifest, 1);
  ModelHandle m = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 3);
  // A catastrophically large learning rate reliably produces non-finite loss.
  TrainConfig cfg = quick_config(6, 4);
  cfg.base_lr = 1e18;
  cfg.weight_decay = 1e18;
  CHECK_THROWS_AS(train_model(m, f.store, plan, cfg), NumericError);
}

TEST_CASE("a diverged fold marks the aggregate incomplete, others persist") {
  ToneFixture f = make_tone_fixture("cv_diverge", 2, 10);
  TrainConfig cfg = quick_config(2, 31);
  cfg.base_lr = 1e18;
  cfg.weight_decay = 1e18;
  fs::path runs = fresh_dir("cv_diverge_runs");
  CrossValResult result =
      cross_validate(Architecture::kTiny, InitMode::kRandom, nullptr, f.store, cfg, 7, runs);
  CHECK(!result.complete);
  CHECK(result.runs.size() == 5);
  for (const auto& r : result.runs) CHECK(r.diverged);
}
