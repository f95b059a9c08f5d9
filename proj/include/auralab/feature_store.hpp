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
// Binary feature cache: one raw little-endian float32 record per clip (plus
// augmented variants), indexed by store.json. Caching is idempotent: a
// re-run under the same configuration verifies checksums and rewrites
// nothing.
//
// Layout: <root>/records/<clip_id>[.aug-<k>].bin, <root>/store.json

#ifndef AURALAB_FEATURE_STORE_HPP_
#define AURALAB_FEATURE_STORE_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "auralab/dataset.hpp"
#include "auralab/dsp.hpp"

namespace auralab {

struct DspConfig {
  std::array<WindowSpec, 3> specs = canonical_window_specs();
  MelScale scale = MelScale::kSlaney;
  int target_sample_rate = 44100;
  int tensor_width = 250;
  double nominal_seconds = 5.0;

  // Stable fingerprint of every field that affects record bytes.
  uint64_t content_hash() const;
};
DspConfig dsp_config_for(DatasetKind kind);

struct RecordInfo {
  std::string name;      // "<clip_id>" or "<clip_id>.aug-<k>"
  std::string clip_id;   // parent clip
  bool augmented = false;
  int label = 0;
  std::string class_name;
  int fold = 0;  // 0 when the dataset has no official folds
  std::vector<int> shape;  // {3, 128, W}
  size_t byte_length = 0;
  uint32_t crc32 = 0;
};

struct FeatureStore {
  fs::path root;
  DatasetKind kind = DatasetKind::kEsc50;
  DspConfig config;
  std::string normalization;  // applied at load time
  std::map<std::string, RecordInfo> records;

  fs::path record_path(const std::string& record_name) const {
    return root / "records" / (record_name + ".bin");
  }
};

struct CacheStats {
  size_t written = 0;
  size_t verified = 0;
};

// Extracts (and augments, when a policy is given) every manifest clip into
// out_dir. Per-clip failures are collected and reported together; the store
// index is only written when every record succeeded.
FeatureStore cache_features(const DatasetManifest& m, const DspConfig& cfg,
                            const std::optional<AugmentationPolicy>& augmentation,
                            const fs::path& out_dir, CacheStats* stats = nullptr,
                            int num_threads = 0);

FeatureStore open_feature_store(const fs::path& dir);

// A labeled record reference plus lazy tensor access. Tensors come back
// normalized (per-sample per-channel z-score).
struct ExampleRef {
  std::string record_name;
  std::string clip_id;
  int label = 0;
};

enum class Split { kTrain, kVal };

// Train split: base records, plus augmented ones when include_augmented.
// Validation: base records only, always.
std::vector<ExampleRef> load_examples(const FeatureStore& store, const FoldPlan& plan, Split split,
                                      bool include_augmented);

MelTensor load_record(const FeatureStore& store, const std::string& record_name,
                      bool normalized = true);

int store_num_classes(const FeatureStore& store);

// Fold plans derivable from the store alone (no raw audio needed). These
// mirror the manifest-based splits exactly: same ordering, same seeding.
FoldPlan store_fold_plan(const FeatureStore& store, int fold_index);
FoldPlan store_fold_plan_seeded(const FeatureStore& store, uint64_t seed);

}  // namespace auralab

#endif  // AURALAB_FEATURE_STORE_HPP_
