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

#include <map>
#include <set>

#include "auralab/dataset.hpp"
#include "auralab/feature_store.hpp"
#include "testutil.hpp"

using namespace auralab;
using namespace testutil;

TEST_CASE("esc50 manifest enumerates 2000 entries over 5 folds of 400") {
  fs::path root = make_esc50_tree("esc50_tree");
  DatasetManifest m = build_manifest(DatasetKind::kEsc50, root);
  CHECK(m.entries.size() == 2000);
  CHECK(m.num_classes() == 50);
  std::map<int, int> folds;
  for (const auto& e : m.entries) ++folds[e.fold];
  CHECK(folds.size() == 5);
  for (int f = 1; f <= 5; ++f) CHECK(folds[f] == 400);
  // Class indices follow sorted class names.
  for (const auto& e : m.entries) CHECK(m.class_names[e.label] == e.class_name);
  CHECK(std::is_sorted(m.class_names.begin(), m.class_names.end()));

  SUBCASE("fold splits partition the manifest") {
    FoldPlan plan = split_folds(m, 1);
    CHECK(plan.val_ids.size() == 400);
    CHECK(plan.train_ids.size() == 1600);
    std::set<std::string> all(plan.train_ids.begin(), plan.train_ids.end());
    for (const auto& id : plan.val_ids) CHECK(all.insert(id).second);
    CHECK(all.size() == 2000);
  }
  SUBCASE("fold index validation") {
    CHECK_THROWS_AS(split_folds(m, 0), DomainError);
    CHECK_THROWS_AS(split_folds(m, 6), DomainError);
  }
  SUBCASE("every clip appears in validation exactly once across folds") {
    std::map<std::string, int> seen;
    for (int f = 1; f <= 5; ++f) {
      for (const auto& id : split_folds(m, f).val_ids) ++seen[id];
    }
    CHECK(seen.size() == 2000);
    for (const auto& [id, n] : seen) CHECK(n == 1);
  }
}

TEST_CASE("entry count mismatch is an integrity error") {
  fs::path root = make_esc50_tree("esc50_short");
  // Drop the last CSV row.
  std::string csv = read_text_file(root / "meta" / "esc50.csv");
  csv.erase(csv.find_last_of('\n', csv.size() - 2) + 1);
  write_text_file(root / "meta" / "esc50.csv", csv);
  try {
    build_manifest(DatasetKind::kEsc50, root);
    FAIL("expected IntegrityError");
  } catch (const IntegrityError& e) {
    CHECK(std::string(e.what()).find("1999") != std::string::npos);
    CHECK(std::string(e.what()).find("2000") != std::string::npos);
  }
}

TEST_CASE("missing metadata is an ingestion error") {
  fs::path root = fresh_dir("esc50_empty");
  CHECK_THROWS_AS(build_manifest(DatasetKind::kEsc50, root), IoError);
  CHECK_THROWS_AS(build_manifest(DatasetKind::kGtzan, root / "nodir"), IoError);
}

TEST_CASE("urbansound8k manifest enumerates 8732 entries across 10 folds") {
  fs::path root = make_us8k_tree("us8k_tree");
  DatasetManifest m = build_manifest(DatasetKind::kUrbanSound8k, root);
  CHECK(m.entries.size() == 8732);
  CHECK(m.num_classes() == 10);
  std::set<int> folds;
  for (const auto& e : m.entries) folds.insert(e.fold);
  CHECK(folds.size() == 10);
  std::map<std::string, int> seen;
  for (int f = 1; f <= 10; ++f)
    for (const auto& id : split_folds(m, f).val_ids) ++seen[id];
  CHECK(seen.size() == 8732);
}

TEST_CASE("gtzan manifest and seeded stratified split") {
  fs::path root = make_gtzan_tree("gtzan_tree");
  DatasetManifest m = build_manifest(DatasetKind::kGtzan, root);
  CHECK(m.entries.size() == 1000);
  CHECK(m.num_classes() == 10);
  CHECK(dataset_profile(m.kind).official_folds == 0);
  CHECK_THROWS_AS(split_folds(m, 1), DomainError);

  FoldPlan plan = split_folds_seeded(m, 7);
  CHECK(plan.val_ids.size() == 200);
  CHECK(plan.train_ids.size() == 800);
  std::map<int, int> val_hist;
  for (const auto& id : plan.val_ids) ++val_hist[m.by_id(id).label];
  for (const auto& [label, count] : val_hist) CHECK(count == 20);

  FoldPlan again = split_folds_seeded(m, 7);
  CHECK(again.val_ids == plan.val_ids);
  FoldPlan other = split_folds_seeded(m, 8);
  CHECK(other.val_ids != plan.val_ids);

  std::set<std::string> uni(plan.train_ids.begin(), plan.train_ids.end());
  for (const auto& id : plan.val_ids) CHECK(uni.insert(id).second);
  CHECK(uni.size() == 1000);
}

TEST_CASE("feature cache: counts, idempotence, and round trips") {
  fs::path data = make_tones_tree("store_tones", 2, 3);
  DatasetManifest m = build_manifest(DatasetKind::kTones, data);
  DspConfig cfg = dsp_config_for(DatasetKind::kTones);
  fs::path store_dir = fresh_dir("store_out");

  SUBCASE("base records only") {
    CacheStats stats;
    FeatureStore store = cache_features(m, cfg, std::nullopt, store_dir, &stats);
    CHECK(store.records.size() == 6);
    CHECK(stats.written == 6);
    for (const auto& [name, r] : store.records) {
      CHECK(r.shape == std::vector<int>{3, 128, 64});
      CHECK(!r.augmented);
    }
  }

  SUBCASE("augmentation multiplies record count by 1 + variants") {
    AugmentationPolicy policy = default_augmentation_policy();
    FeatureStore store = cache_features(m, cfg, policy, store_dir);
    // Oracle: clips x (1 + |policy|).
    CHECK(store.records.size() == m.entries.size() * (1 + policy.variant_count()));
    size_t augmented = 0;
    for (const auto& [name, r] : store.records) augmented += r.augmented;
    CHECK(augmented == m.entries.size() * policy.variant_count());
  }

  SUBCASE("second run rewrites nothing and verifies checksums") {
    CacheStats first;
    cache_features(m, cfg, std::nullopt, store_dir, &first);
    CHECK(first.written == 6);
    CacheStats second;
    cache_features(m, cfg, std::nullopt, store_dir, &second);
    CHECK(second.written == 0);
    CHECK(second.verified == 6);

    // A corrupted record is detected and rewritten.
    fs::path victim = store_dir / "records" / (m.entries[0].clip_id + ".bin");
    auto bytes = read_binary_file(victim);
    bytes[8] ^= 0xFF;
    write_binary_file(victim, bytes.data(), bytes.size());
    CacheStats third;
    cache_features(m, cfg, std::nullopt, store_dir, &third);
    CHECK(third.written == 1);
    CHECK(third.verified == 5);
  }

  SUBCASE("cached tensor round-trips bit for bit") {
    FeatureStore store = cache_features(m, cfg, std::nullopt, store_dir);
    const ClipEntry& e = m.entries[0];
    Waveform w = load_audio(e.path, cfg.target_sample_rate);
    size_t nominal = static_cast<size_t>(cfg.nominal_seconds * cfg.target_sample_rate);
    if (w.samples.size() < nominal) w.samples.resize(nominal, 0.0f);
    MelTensor direct = multires_melspec(w, cfg.specs, cfg.tensor_width, cfg.scale);
    MelTensor cached = load_record(store, e.clip_id, /*normalized=*/false);
    CHECK(cached.values == direct.values);

    FeatureStore reopened = open_feature_store(store_dir);
    MelTensor cached2 = load_record(reopened, e.clip_id, /*normalized=*/false);
    CHECK(cached2.values == direct.values);
  }

  SUBCASE("manifest construction rejects undecodable audio") {
    write_text_file(data / "tone0" / "broken.wav", "not a wav");
    CHECK_THROWS_AS(build_manifest(DatasetKind::kTones, data), DecodeError);
  }
}

TEST_CASE("extraction failure reports the failing record and writes no index") {
  // Hand-built manifest pointing one entry at a corrupt file bypasses probe
  // checks, so the failure surfaces during extraction.
  fs::path data = make_tones_tree("store_fail", 2, 2);
  DatasetManifest m = build_manifest(DatasetKind::kTones, data);
  fs::path corrupt = data / "tone0" / "corrupt.wav";
  write_text_file(corrupt, "RIFFxxxxWAVE");  // RIFF magic, invalid body
  m.entries[0].path = corrupt;
  fs::path store_dir = fresh_dir("store_fail_out");
  try {
    cache_features(m, dsp_config_for(DatasetKind::kTones), std::nullopt, store_dir);
    FAIL("expected IntegrityError");
  } catch (const IntegrityError& e) {
    CHECK(std::string(e.what()).find(m.entries[0].clip_id) != std::string::npos);
  }
  CHECK(!fs::exists(store_dir / "store.json"));
}

TEST_CASE("load_examples respects splits and augmentation flags") {
  ToneFixture f = make_tone_fixture("loadex", 2, 5, /*augmented=*/true);
  FoldPlan plan = split_folds(f.manifest, 1);
  size_t val_count = plan.val_ids.size();
  size_t train_count = plan.train_ids.size();
  REQUIRE(val_count + train_count == 10);

  auto val = load_examples(f.store, plan, Split::kVal, false);
  CHECK(val.size() == val_count);
  auto val_aug = load_examples(f.store, plan, Split::kVal, true);
  CHECK(val_aug.size() == val_count);  // validation never sees augmented records
  auto train_plain = load_examples(f.store, plan, Split::kTrain, false);
  CHECK(train_plain.size() == train_count);
  auto train_aug = load_examples(f.store, plan, Split::kTrain, true);
  CHECK(train_aug.size() == train_count * 5);  // base + 4 variants

  for (const auto& ref : train_aug) {
    const RecordInfo& r = f.store.records.at(ref.record_name);
    CHECK(r.label == ref.label);
  }

  SUBCASE("missing record raises integrity error naming the clip") {
    FoldPlan broken = plan;
    broken.val_ids.push_back("no_such_clip");
    try {
      load_examples(f.store, broken, Split::kVal, false);
      FAIL("expected IntegrityError");
    } catch (const IntegrityError& e) {
      CHECK(std::string(e.what()).find("no_such_clip") != std::string::npos);
    }
  }
}

TEST_CASE("normalized load yields zero-mean unit-std channels") {
  ToneFixture f = make_tone_fixture("loadnorm", 2, 2);
  MelTensor t = load_record(f.store, f.manifest.entries[0].clip_id);
  size_t per = static_cast<size_t>(t.n_mels) * t.width;
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (size_t i = 0; i < per; ++i) mean += t.values[c * per + i];
    mean /= per;
    CHECK(std::abs(mean) < 1e-4);
  }
}

TEST_CASE("store fold plans match manifest fold plans") {
  ToneFixture f = make_tone_fixture("foldparity", 2, 10);
  for (int fold = 1; fold <= 5; ++fold) {
    FoldPlan a = split_folds(f.manifest, fold);
    FoldPlan b = store_fold_plan(f.store, fold);
    CHECK(a.val_ids == b.val_ids);
    CHECK(a.train_ids == b.train_ids);
  }
  FoldPlan sa = split_folds_seeded(f.manifest, 42);
  FoldPlan sb = store_fold_plan_seeded(f.store, 42);
  CHECK(sa.val_ids == sb.val_ids);
  CHECK(sa.train_ids == sb.train_ids);
  CHECK(store_num_classes(f.store) == 2);
}

TEST_CASE("store index carries the format contract fields") {
  ToneFixture f = make_tone_fixture("storejson", 2, 2);
  std::string text = read_text_file(f.store_dir / "store.json");
  for (const char* key : {"format_version", "dsp_config_hash", "dtype", "records", "normalization",
                          "byte_order"}) {
    CHECK(text.find(key) != std::string::npos);
  }
  // Record files live at records/<clip_id>.bin.
  CHECK(fs::exists(f.store_dir / "records" / (f.manifest.entries[0].clip_id + ".bin")));
}
