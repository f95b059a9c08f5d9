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
// Experiment configuration: TOML (or JSON) file plus flag overrides, strict
// schema validation, defaults from the training protocol, and a resolved
// echo written next to every artifact.

#ifndef AURALAB_CONFIG_HPP_
#define AURALAB_CONFIG_HPP_

#include <map>
#include <optional>
#include <string>

#include "auralab/dataset.hpp"
#include "auralab/ensemble.hpp"
#include "auralab/train.hpp"

#include "json.hpp"

namespace auralab {

// Parses the TOML subset used by config files: [sections], key = value with
// string/int/float/bool/array values, # comments.
nlohmann::json parse_toml(const std::string& text);

struct ExperimentConfig {
  uint64_t root_seed = 0;

  DatasetKind dataset = DatasetKind::kEsc50;
  fs::path dataset_root;
  int fold = 1;
  uint64_t split_seed = 7;  // GTZAN-style seeded splits

  MelScale mel_scale = MelScale::kSlaney;
  bool augment = false;
  AugmentationPolicy augmentation = default_augmentation_policy();

  Architecture architecture = Architecture::kDenseNet201;
  InitMode init = InitMode::kPretrained;
  fs::path pretrained_archive;

  TrainConfig train = default_train_config(Regime::kPretrained70);
  bool regime_explicit = false;

  int ensemble_members = 5;

  double variance_keep = 0.99;
  int ig_steps = 50;
  std::string ig_clip;
  int ig_target = -1;
  std::string analyze_run;

  fs::path out_dir = "out";

  fs::path features_dir() const { return out_dir / "features" / dataset_kind_name(dataset); }
  fs::path runs_dir() const { return out_dir / "runs"; }
  fs::path analysis_dir() const { return out_dir / "analysis"; }
  fs::path ensembles_dir() const { return out_dir / "ensembles"; }
  fs::path report_dir() const { return out_dir / "report"; }

  // Serialized resolved form (every default applied).
  std::string to_toml() const;
};

// Overrides are (section.key or key) -> raw TOML value text, applied after
// the file. Unknown keys, type mismatches, and invariant violations raise
// ConfigError naming the key.
ExperimentConfig parse_and_validate(const std::optional<fs::path>& config_file,
                                    const std::map<std::string, std::string>& overrides);

}  // namespace auralab

#endif  // AURALAB_CONFIG_HPP_
