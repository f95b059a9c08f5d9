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
//
// Shared fixtures: synthetic audio, dataset trees with the official layouts,
// and a cached tone feature store for training-level tests.

#ifndef AURALAB_TESTS_TESTUTIL_HPP_
#define AURALAB_TESTS_TESTUTIL_HPP_

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "auralab/audio_io.hpp"
#include "auralab/common.hpp"
#include "auralab/dataset.hpp"
#include "auralab/feature_store.hpp"

namespace testutil {

using namespace auralab;

inline fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("auralab_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

inline std::vector<float> tone_samples(double hz, double seconds, int sr, uint64_t seed,
                                       float amp = 0.5f) {
  Rng rng(seed);
  size_t n = static_cast<size_t>(seconds * sr);
  std::vector<float> x(n);
  double phase = rng.uniform() * 6.283185307179586;
  for (size_t i = 0; i < n; ++i) {
    double s = 0.7 * std::sin(6.283185307179586 * hz * i / sr + phase) +
               0.2 * std::sin(6.283185307179586 * 2 * hz * i / sr) +
               0.08 * (rng.uniform() * 2.0 - 1.0);
    x[i] = amp * static_cast<float>(s);
  }
  return x;
}

// Genre-directory layout for the synthetic "tones" kind. Class c carries a
// fundamental near 150 * 2^c Hz.
inline fs::path make_tones_tree(const std::string& name, int classes, int clips_per_class,
                                double seconds = 1.0, uint64_t seed = 1) {
  fs::path root = fresh_dir(name);
  int sr = 22050;
  for (int c = 0; c < classes; ++c) {
    fs::path dir = root / ("tone" + std::to_string(c));
    fs::create_directories(dir);
    for (int i = 0; i < clips_per_class; ++i) {
      double hz = 150.0 * std::pow(2.0, c) * (1.0 + 0.06 * ((seed + i) % 7 - 3) / 3.0);
      char file[64];
      std::snprintf(file, sizeof(file), "tone%d.%05d.wav", c, i);
      write_wav(dir / file, tone_samples(hz, seconds, sr, seed * 1000 + c * 100 + i), 1, sr);
    }
  }
  return root;
}

// Full-cardinality ESC-50 tree: 2000 tiny clips, 50 classes, 5 folds.
inline fs::path make_esc50_tree(const std::string& name) {
  fs::path root = fresh_dir(name);
  fs::create_directories(root / "meta");
  fs::create_directories(root / "audio");
  std::string csv = "filename,fold,target,category,esc10,src_file,take\n";
  int sr = 8000;
  std::vector<float> clip = tone_samples(500.0, 0.05, sr, 3);
  for (int i = 0; i < 2000; ++i) {
    int fold = i % 5 + 1;
    int target = i % 50;
    char file[64];
    std::snprintf(file, sizeof(file), "%d-%06d-%c-%d.wav", fold, i, 'A', target);
    write_wav(root / "audio" / file, clip, 1, sr);
    csv += std::string(file) + "," + std::to_string(fold) + "," + std::to_string(target) +
           ",class_" + (target < 10 ? "0" : "") + std::to_string(target) + ",False,src,1\n";
  }
  write_text_file(root / "meta" / "esc50.csv", csv);
  return root;
}

// Full-cardinality UrbanSound8K tree: 8732 tiny clips over 10 folds.
inline fs::path make_us8k_tree(const std::string& name) {
  fs::path root = fresh_dir(name);
  fs::create_directories(root / "metadata");
  std::string csv = "slice_file_name,fsID,start,end,salience,fold,classID,class\n";
  int sr = 8000;
  std::vector<float> clip = tone_samples(400.0, 0.05, sr, 4);
  for (int i = 0; i < 8732; ++i) {
    int fold = i % 10 + 1;
    int class_id = i % 10;
    char file[64];
    std::snprintf(file, sizeof(file), "%d-%d-0-0.wav", 100000 + i, class_id);
    fs::path dir = root / "audio" / ("fold" + std::to_string(fold));
    fs::create_directories(dir);
    write_wav(dir / file, clip, 1, sr);
    csv += std::string(file) + "," + std::to_string(100000 + i) + ",0.0,0.05,1," +
           std::to_string(fold) + "," + std::to_string(class_id) + ",urban_" +
           std::to_string(class_id) + "\n";
  }
  write_text_file(root / "metadata" / "UrbanSound8K.csv", csv);
  return root;
}

// Full-cardinality GTZAN tree: 10 genres x 100 clips.
inline fs::path make_gtzan_tree(const std::string& name) {
  fs::path root = fresh_dir(name);
  int sr = 8000;
  std::vector<float> clip = tone_samples(300.0, 0.05, sr, 5);
  const char* genres[] = {"blues", "classical", "country", "disco", "hiphop",
                          "jazz", "metal", "pop", "reggae", "rock"};
  for (const char* g : genres) {
    fs::path dir = root / "genres" / g;
    fs::create_directories(dir);
    for (int i = 0; i < 100; ++i) {
      char file[64];
      std::snprintf(file, sizeof(file), "%s.%05d.wav", g, i);
      write_wav(dir / file, clip, 1, sr);
    }
  }
  return root;
}

// Cached tone features: the workhorse fixture for training-scale tests.
struct ToneFixture {
  fs::path dataset_root;
  fs::path store_dir;
  DatasetManifest manifest;
  FeatureStore store;
};

inline ToneFixture make_tone_fixture(const std::string& name, int classes, int clips_per_class,
                                     bool augmented = false) {
  ToneFixture f;
  f.dataset_root = make_tones_tree(name + "_data", classes, clips_per_class);
  f.store_dir = fresh_dir(name + "_store");
  f.manifest = build_manifest(DatasetKind::kTones, f.dataset_root);
  DspConfig cfg = dsp_config_for(DatasetKind::kTones);
  std::optional<AugmentationPolicy> policy;
  if (augmented) policy = default_augmentation_policy();
  f.store = cache_features(f.manifest, cfg, policy, f.store_dir);
  return f;
}

}  // namespace testutil

#endif  // AURALAB_TESTS_TESTUTIL_HPP_
