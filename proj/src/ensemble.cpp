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

#include "auralab/ensemble.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"

namespace auralab {

using nlohmann::json;

std::vector<uint64_t> EnsembleConfig::member_seeds() const {
  if (members < 2) throw ConfigError("ensemble: need at least 2 members");
  std::vector<uint64_t> seeds;
  if (!explicit_seeds.empty()) {
    if (static_cast<int>(explicit_seeds.size()) != members)
      throw ConfigError("ensemble: explicit seed count does not match member count");
    seeds = explicit_seeds;
  } else {
    for (int i = 0; i < members; ++i) seeds.push_back(splitmix64(root_seed + static_cast<uint64_t>(i)));
  }
  std::set<uint64_t> uniq(seeds.begin(), seeds.end());
  if (uniq.size() != seeds.size())
    throw ConfigError("ensemble: member seeds must be pairwise distinct");
  return seeds;
}

EnsembleRunResult run_ensemble(Architecture arch, InitMode init, const WeightArchive* pretrained,
                               const FeatureStore& store, const FoldPlan& plan,
                               const TrainConfig& base_cfg, const EnsembleConfig& ens,
                               const fs::path& runs_dir, const EpochCallback& on_epoch) {
  std::vector<uint64_t> seeds = ens.member_seeds();
  EnsembleRunResult result;
  for (size_t i = 0; i < seeds.size(); ++i) {
    TrainConfig cfg = base_cfg;
    cfg.seed = seeds[i];
    ModelHandle model = build_backbone(arch, init, store_num_classes(store), seeds[i], pretrained);
    std::string run_id = dataset_kind_name(store.kind) + "-" + architecture_name(arch) + "-" +
                         init_mode_name(init) + "-member" + std::to_string(i) + "-seed" +
                         std::to_string(seeds[i] % 100000);
    result.run_ids.push_back(run_id);
    try {
      RunRecord rec = train_model(model, store, plan, cfg, on_epoch);
      rec.run_id = run_id;
      persist_run(rec, model, runs_dir / run_id);
      result.runs.push_back(std::move(rec));
      result.healthy.push_back(true);
    } catch (const NumericError&) {
      RunRecord rec;
      rec.run_id = run_id;
      rec.dataset = dataset_kind_name(store.kind);
      rec.architecture = architecture_name(arch);
      rec.init_mode = init_mode_name(init);
      rec.config = cfg;
      rec.diverged = true;
      result.runs.push_back(std::move(rec));
      result.healthy.push_back(false);
    }
  }
  return result;
}

EnsemblePrediction ensemble_predict(std::vector<ModelHandle>& models,
                                    const nn::Tensor<float>& inputs) {
  if (models.empty()) throw DomainError("ensemble_predict: no models");
  int num_classes = models[0].num_classes;
  for (const ModelHandle& m : models) {
    if (m.num_classes != num_classes)
      throw DomainError("ensemble_predict: members disagree on class count");
  }
  EnsemblePrediction pred;
  for (ModelHandle& m : models) {
    const nn::Tensor<float>& logits = m.net().forward(inputs, /*training=*/false,
                                                      /*retain_activations=*/false);
    pred.member_probs.push_back(nn::softmax(logits));
  }
  // Double accumulation keeps the mean invariant under member permutation.
  pred.mean_probs = nn::Tensor<float>(pred.member_probs[0].shape);
  std::vector<double> acc(pred.mean_probs.numel(), 0.0);
  for (const auto& p : pred.member_probs)
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += p.v[i];
  for (size_t i = 0; i < acc.size(); ++i)
    pred.mean_probs.v[i] = static_cast<float>(acc[i] / static_cast<double>(models.size()));
  const int n = pred.mean_probs.dim(0), c = pred.mean_probs.dim(1);
  for (int i = 0; i < n; ++i) {
    const float* row = pred.mean_probs.v.data() + static_cast<size_t>(i) * c;
    int arg = 0;
    for (int j = 1; j < c; ++j)
      if (row[j] > row[arg]) arg = j;
    pred.predicted.push_back(arg);
  }
  return pred;
}

Metrics ensemble_evaluate(std::vector<ModelHandle>& models, const FeatureStore& store,
                          const std::vector<std::string>& ids) {
  if (ids.empty()) throw DomainError("ensemble_evaluate: empty id list");
  constexpr size_t kBatch = 32;
  std::vector<int> labels, predictions;
  // Load per batch; evaluation uses base records only.
  for (size_t begin = 0; begin < ids.size(); begin += kBatch) {
    size_t end = std::min(ids.size(), begin + kBatch);
    std::vector<int> batch_labels;
    nn::Tensor<float> batch;
    for (size_t i = begin; i < end; ++i) {
      auto it = store.records.find(ids[i]);
      if (it == store.records.end())
        throw IntegrityError("feature store has no record for clip '" + ids[i] + "'");
      MelTensor t = load_record(store, ids[i]);
      if (batch.empty()) {
        batch = nn::Tensor<float>({static_cast<int>(end - begin), MelTensor::kChannels, t.n_mels,
                                   t.width});
      }
      std::copy(t.values.begin(), t.values.end(),
                batch.v.begin() + static_cast<long>((i - begin) * t.values.size()));
      batch_labels.push_back(it->second.label);
    }
    EnsemblePrediction pred = ensemble_predict(models, batch);
    labels.insert(labels.end(), batch_labels.begin(), batch_labels.end());
    predictions.insert(predictions.end(), pred.predicted.begin(), pred.predicted.end());
  }
  return metrics_from_predictions(labels, predictions, models[0].num_classes);
}

void write_ensemble_descriptor(const EnsembleRunResult& result, const EnsembleConfig& cfg,
                               const fs::path& path) {
  json j;
  j["members"] = cfg.members;
  j["root_seed"] = cfg.root_seed;
  j["member_seeds"] = cfg.member_seeds();
  j["run_ids"] = result.run_ids;
  j["healthy"] = result.healthy;
  write_text_file(path, j.dump(2) + "\n");
}

void write_ensemble_report_csv(const std::vector<double>& member_accuracies,
                               double ensemble_accuracy, const fs::path& path) {
  std::ostringstream csv;
  csv << "member,accuracy\n";
  for (size_t i = 0; i < member_accuracies.size(); ++i)
    csv << i << "," << member_accuracies[i] << "\n";
  csv << "ensemble," << ensemble_accuracy << "\n";
  write_text_file(path, csv.str());
}

}  // namespace auralab
