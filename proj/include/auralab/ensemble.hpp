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
// Deep ensembles: M identically configured models that differ only in
// classifier initialization and mini-batch order. Prediction averages the
// per-member softmax outputs (softmax first, then the unweighted mean).

#ifndef AURALAB_ENSEMBLE_HPP_
#define AURALAB_ENSEMBLE_HPP_

#include <vector>

#include "auralab/train.hpp"

namespace auralab {

struct EnsembleConfig {
  int members = 5;
  uint64_t root_seed = 0;
  std::vector<uint64_t> explicit_seeds;  // optional override

  // Per-member seeds derived from the root seed by a fixed counter scheme;
  // rejects duplicate seeds.
  std::vector<uint64_t> member_seeds() const;
};

struct EnsemblePrediction {
  std::vector<nn::Tensor<float>> member_probs;  // each {N, C}
  nn::Tensor<float> mean_probs;                 // {N, C}
  std::vector<int> predicted;
};

struct EnsembleRunResult {
  std::vector<RunRecord> runs;
  std::vector<bool> healthy;
  std::vector<std::string> run_ids;
};

// Trains the M members; a diverged member is flagged rather than fatal.
EnsembleRunResult run_ensemble(Architecture arch, InitMode init, const WeightArchive* pretrained,
                               const FeatureStore& store, const FoldPlan& plan,
                               const TrainConfig& base_cfg, const EnsembleConfig& ens,
                               const fs::path& runs_dir,
                               const EpochCallback& on_epoch = nullptr);

EnsemblePrediction ensemble_predict(std::vector<ModelHandle>& models,
                                    const nn::Tensor<float>& inputs);

Metrics ensemble_evaluate(std::vector<ModelHandle>& models, const FeatureStore& store,
                          const std::vector<std::string>& ids);

// Descriptor JSON (member run ids + root seed) and a per-member accuracy CSV.
void write_ensemble_descriptor(const EnsembleRunResult& result, const EnsembleConfig& cfg,
                               const fs::path& path);
void write_ensemble_report_csv(const std::vector<double>& member_accuracies,
                               double ensemble_accuracy, const fs::path& path);

}  // namespace auralab

#endif  // AURALAB_ENSEMBLE_HPP_
