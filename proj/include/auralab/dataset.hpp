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
// Dataset ingest and split management for ESC-50, UrbanSound8K, and GTZAN,
// plus a synthetic "tones" kind used to exercise the pipeline at CPU scale.

#ifndef AURALAB_DATASET_HPP_
#define AURALAB_DATASET_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "auralab/common.hpp"
#include "auralab/dsp.hpp"

namespace auralab {

enum class DatasetKind { kEsc50, kUrbanSound8k, kGtzan, kTones };

std::string dataset_kind_name(DatasetKind k);
DatasetKind dataset_kind_from_name(const std::string& s);

struct ClipEntry {
  std::string clip_id;
  fs::path path;
  int label = 0;
  std::string class_name;
  int fold = 0;  // 0 when the dataset has no official folds
  double duration_s = 0.0;
  int source_sample_rate = 0;
};

struct DatasetManifest {
  DatasetKind kind = DatasetKind::kEsc50;
  std::vector<ClipEntry> entries;  // sorted by clip_id
  std::vector<std::string> class_names;  // index == label

  int num_classes() const { return static_cast<int>(class_names.size()); }
  const ClipEntry& by_id(const std::string& clip_id) const;
};

// Canonical per-dataset processing constants.
struct DatasetProfile {
  int target_sample_rate = 0;
  double nominal_seconds = 0.0;  // clips shorter than this are right-padded
  int tensor_width = 0;          // MelTensor frame count after resizing
  int official_folds = 0;        // 0: seeded split instead
};
DatasetProfile dataset_profile(DatasetKind k);

// Reads the dataset's published metadata (CSV for ESC-50/UrbanSound8K, genre
// directories for GTZAN and tones) and validates entry counts, class counts,
// and fold structure.
DatasetManifest build_manifest(DatasetKind kind, const fs::path& root_dir);

struct FoldPlan {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::optional<int> fold_index;
  std::optional<uint64_t> seed;
};

// Folded datasets: validation = the named fold. GTZAN: seeded stratified
// 80/20 split with exactly 20 validation clips per class.
FoldPlan split_folds(const DatasetManifest& m, int fold_index);
FoldPlan split_folds_seeded(const DatasetManifest& m, uint64_t seed);

}  // namespace auralab

#endif  // AURALAB_DATASET_HPP_
