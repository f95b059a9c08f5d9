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
// Training: Adam with step-decay learning-rate schedule, per-epoch metrics,
// run records, and fold-wise cross-validation.

#ifndef AURALAB_TRAIN_HPP_
#define AURALAB_TRAIN_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "auralab/feature_store.hpp"
#include "auralab/model_zoo.hpp"

namespace auralab {

enum class Regime { kPretrained70, kScratch450 };

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& s);

struct TrainConfig {
  Regime regime = Regime::kPretrained70;
  double base_lr = 1e-4;
  double weight_decay = 1e-3;
  int batch_size = 32;
  int epochs = 70;
  std::vector<int> lr_drop_epochs = {30, 60};
  double drop_factor = 10.0;
  uint64_t seed = 0;
  bool decoupled_weight_decay = false;  // default couples L2 into the gradient
  bool include_augmented = true;

  void validate() const;
};

// Paper presets: 70 epochs with drops at {30, 60}, or 450 with {300, 350}.
TrainConfig default_train_config(Regime regime);

// base_lr / drop_factor^(number of drop epochs <= epoch)
double scheduled_lr(int epoch, const TrainConfig& cfg);

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::vector<int>> confusion;  // [true][pred]

  int total() const;
};

Metrics metrics_from_predictions(const std::vector<int>& labels, const std::vector<int>& predictions,
                                 int num_classes);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct RunRecord {
  std::string run_id;
  std::string dataset;
  std::optional<int> fold;
  std::optional<uint64_t> split_seed;
  std::string architecture;
  std::string init_mode;
  TrainConfig config;
  std::vector<EpochLog> epochs;
  double final_val_accuracy = 0.0;
  std::string checkpoint_dir;  // relative to the run directory
  double wall_clock_seconds = 0.0;
  bool diverged = false;
  int diverged_epoch = -1;
};

// Adam with optional decoupled weight decay; beta1=0.9, beta2=0.999, eps=1e-8.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<nn::Param<float>*> params, double weight_decay, bool decoupled);
  void step(double lr);

 private:
  std::vector<nn::Param<float>*> params_;
  std::vector<std::vector<float>> m_, v_;
  double weight_decay_;
  bool decoupled_;
  long t_ = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Trains in place. Mini-batch order is drawn from cfg.seed; a non-finite
// loss aborts with NumericError carrying the epoch. Deterministic given
// (seed, config, store) on fixed hardware.
RunRecord train_model(ModelHandle& m, const FeatureStore& store, const FoldPlan& plan,
                      const TrainConfig& cfg, const EpochCallback& on_epoch = nullptr);

// Forward-only evaluation over base records; model weights are untouched.
Metrics evaluate_model(ModelHandle& m, const FeatureStore& store,
                       const std::vector<std::string>& ids);

// Persists record.json, metrics.csv, and checkpoint/ under run_dir.
void persist_run(const RunRecord& record, ModelHandle& m, const fs::path& run_dir);
RunRecord load_run_record(const fs::path& run_dir);

struct CrossValResult {
  std::vector<RunRecord> runs;
  double mean_accuracy = 0.0;
  bool complete = true;
};

// One run per fold; aggregate accuracy is the arithmetic mean of per-fold
// accuracies. A diverged fold marks the aggregate incomplete but the other
// folds are still persisted.
CrossValResult cross_validate(Architecture arch, InitMode init, const WeightArchive* pretrained,
                              const FeatureStore& store, const TrainConfig& cfg,
                              uint64_t split_seed, const fs::path& runs_dir,
                              const EpochCallback& on_epoch = nullptr);

}  // namespace auralab

#endif  // AURALAB_TRAIN_HPP_
