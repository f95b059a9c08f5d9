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

#include "auralab/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace auralab {

using nlohmann::json;

std::string regime_name(Regime r) {
  return r == Regime::kPretrained70 ? "pretrained70" : "scratch450";
}

Regime regime_from_name(const std::string& s) {
  if (s == "pretrained70" || s == "pretrained") return Regime::kPretrained70;
  if (s == "scratch450" || s == "scratch") return Regime::kScratch450;
  throw ConfigError("unknown regime '" + s + "' (want pretrained70 or scratch450)");
}

void TrainConfig::validate() const {
  if (base_lr <= 0.0) throw ConfigError("train config: base_lr must be positive");
  if (weight_decay < 0.0) throw ConfigError("train config: weight_decay must be non-negative");
  if (batch_size < 1) throw ConfigError("train config: batch_size must be at least 1");
  if (epochs < 1) throw ConfigError("train config: epochs must be at least 1");
  if (drop_factor <= 1.0) throw ConfigError("train config: drop_factor must exceed 1");
  int prev = 0;
  for (int e : lr_drop_epochs) {
    if (e <= prev) throw ConfigError("train config: lr_drop_epochs must be strictly increasing");
    if (e >= epochs)
      throw ConfigError("train config: lr drop epoch " + std::to_string(e) +
                        " is not before the last epoch");
    prev = e;
  }
}

TrainConfig default_train_config(Regime regime) {
  TrainConfig cfg;
  cfg.regime = regime;
  if (regime == Regime::kPretrained70) {
    cfg.epochs = 70;
    cfg.lr_drop_epochs = {30, 60};
  } else {
    cfg.epochs = 450;
    cfg.lr_drop_epochs = {300, 350};
  }
  return cfg;
}

double scheduled_lr(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs)
    throw DomainError("scheduled_lr: epoch " + std::to_string(epoch) + " out of range");
  int drops = 0;
  for (int e : cfg.lr_drop_epochs)
    if (e <= epoch) ++drops;
  return cfg.base_lr / std::pow(cfg.drop_factor, drops);
}

int Metrics::total() const {
  int n = 0;
  for (const auto& row : confusion)
    for (int v : row) n += v;
  return n;
}

Metrics metrics_from_predictions(const std::vector<int>& labels, const std::vector<int>& predictions,
                                 int num_classes) {
  if (labels.size() != predictions.size() || labels.empty())
    throw DomainError("metrics: labels and predictions must be non-empty and aligned");
  Metrics m;
  m.confusion.assign(num_classes, std::vector<int>(num_classes, 0));
  int correct = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    ++m.confusion[labels[i]][predictions[i]];
    if (labels[i] == predictions[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  m.per_class_accuracy.assign(num_classes, 0.0);
  for (int c = 0; c < num_classes; ++c) {
    int support = 0;
    for (int p = 0; p < num_classes; ++p) support += m.confusion[c][p];
    m.per_class_accuracy[c] = support > 0 ? static_cast<double>(m.confusion[c][c]) / support : 0.0;
  }
  return m;
}

AdamOptimizer::AdamOptimizer(std::vector<nn::Param<float>*> params, double weight_decay,
                             bool decoupled)
    : params_(std::move(params)), weight_decay_(weight_decay), decoupled_(decoupled) {
  for (nn::Param<float>* p : params_) {
    m_.emplace_back(p->value.v.size(), 0.0f);
    v_.emplace_back(p->value.v.size(), 0.0f);
  }
}

void AdamOptimizer::step(double lr) {
  constexpr float kBeta1 = 0.9f, kBeta2 = 0.999f, kEps = 1e-8f;
  ++t_;
  float c1 = 1.0f / (1.0f - std::pow(kBeta1, static_cast<float>(t_)));
  float c2 = 1.0f / (1.0f - std::pow(kBeta2, static_cast<float>(t_)));
  for (size_t i = 0; i < params_.size(); ++i) {
    nn::Param<float>* p = params_[i];
    size_t n = p->value.v.size();
    if (decoupled_) {
      // Decoupled variant: shrink weights directly, keep the gradient clean.
      kernels::scal(n, static_cast<float>(1.0 - lr * weight_decay_), p->value.v.data());
      kernels::adam_step(n, p->value.v.data(), p->grad.v.data(), m_[i].data(), v_[i].data(),
                         static_cast<float>(lr), kBeta1, kBeta2, kEps, 0.0f, c1, c2);
    } else {
      kernels::adam_step(n, p->value.v.data(), p->grad.v.data(), m_[i].data(), v_[i].data(),
                         static_cast<float>(lr), kBeta1, kBeta2, kEps,
                         static_cast<float>(weight_decay_), c1, c2);
    }
  }
}

namespace {

nn::Tensor<float> stack_batch(const FeatureStore& store, const std::vector<ExampleRef>& refs,
                              size_t begin, size_t end, std::vector<int>* labels) {
  MelTensor first = load_record(store, refs[begin].record_name);
  int n = static_cast<int>(end - begin);
  nn::Tensor<float> batch({n, MelTensor::kChannels, first.n_mels, first.width});
  size_t stride = first.values.size();
  std::copy(first.values.begin(), first.values.end(), batch.v.begin());
  labels->clear();
  labels->push_back(refs[begin].label);
  for (size_t i = begin + 1; i < end; ++i) {
    MelTensor t = load_record(store, refs[i].record_name);
    if (t.values.size() != stride)
      throw IntegrityError("record '" + refs[i].record_name + "' has an inconsistent shape");
    std::copy(t.values.begin(), t.values.end(), batch.v.begin() + (i - begin) * stride);
    labels->push_back(refs[i].label);
  }
  return batch;
}

struct EvalResult {
  double loss = 0.0;
  std::vector<int> labels, predictions;
};

EvalResult run_eval(nn::Model<float>& net, const FeatureStore& store,
                    const std::vector<ExampleRef>& refs, int batch_size) {
  EvalResult r;
  double loss_sum = 0.0;
  for (size_t begin = 0; begin < refs.size(); begin += static_cast<size_t>(batch_size)) {
    size_t end = std::min(refs.size(), begin + static_cast<size_t>(batch_size));
    std::vector<int> labels;
    nn::Tensor<float> batch = stack_batch(store, refs, begin, end, &labels);
    const nn::Tensor<float>& logits = net.forward(batch, /*training=*/false,
                                                  /*retain_activations=*/false);
    loss_sum += nn::softmax_xent<float>(logits, labels, nullptr) * static_cast<double>(labels.size());
    const int c = logits.dim(1);
    for (size_t i = 0; i < labels.size(); ++i) {
      const float* row = logits.v.data() + i * static_cast<size_t>(c);
      int arg = 0;
      for (int j = 1; j < c; ++j)
        if (row[j] > row[arg]) arg = j;
      r.labels.push_back(labels[i]);
      r.predictions.push_back(arg);
    }
  }
  r.loss = loss_sum / static_cast<double>(refs.size());
  return r;
}

}  // namespace

RunRecord train_model(ModelHandle& m, const FeatureStore& store, const FoldPlan& plan,
                      const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  std::vector<ExampleRef> train_refs =
      load_examples(store, plan, Split::kTrain, cfg.include_augmented);
  std::vector<ExampleRef> val_refs = load_examples(store, plan, Split::kVal, false);
  if (train_refs.empty()) throw IntegrityError("train_model: empty training split");

  RunRecord rec;
  rec.dataset = dataset_kind_name(store.kind);
  rec.fold = plan.fold_index;
  rec.split_seed = plan.seed;
  rec.architecture = architecture_name(m.architecture);
  rec.init_mode = init_mode_name(m.init_mode);
  rec.config = cfg;

  AdamOptimizer opt(m.net().trainable_params(), cfg.weight_decay, cfg.decoupled_weight_decay);
  Rng order_rng(cfg.seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = scheduled_lr(epoch, cfg);
    order_rng.shuffle(train_refs);
    double loss_sum = 0.0;
    size_t seen = 0;
    int correct = 0;
    for (size_t begin = 0; begin < train_refs.size(); begin += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(train_refs.size(), begin + static_cast<size_t>(cfg.batch_size));
      std::vector<int> labels;
      nn::Tensor<float> batch = stack_batch(store, train_refs, begin, end, &labels);
      const nn::Tensor<float>& logits = m.net().forward(batch, /*training=*/true);
      nn::Tensor<float> dlogits;
      float loss = nn::softmax_xent<float>(logits, labels, &dlogits);
      if (!std::isfinite(loss)) {
        rec.diverged = true;
        rec.diverged_epoch = epoch;
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
      }
      const int c = logits.dim(1);
      for (size_t i = 0; i < labels.size(); ++i) {
        const float* row = logits.v.data() + i * static_cast<size_t>(c);
        int arg = 0;
        for (int j = 1; j < c; ++j)
          if (row[j] > row[arg]) arg = j;
        if (arg == labels[i]) ++correct;
      }
      loss_sum += static_cast<double>(loss) * static_cast<double>(labels.size());
      seen += labels.size();
      m.net().zero_grad();
      m.net().backward(dlogits);
      opt.step(lr);
    }
    EvalResult val = run_eval(m.net(), store, val_refs, cfg.batch_size);
    Metrics val_metrics =
        metrics_from_predictions(val.labels, val.predictions, m.num_classes);
    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.train_loss = loss_sum / static_cast<double>(seen);
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    log.val_loss = val.loss;
    log.val_accuracy = val_metrics.accuracy;
    rec.epochs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  rec.final_val_accuracy = rec.epochs.back().val_accuracy;
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

Metrics evaluate_model(ModelHandle& m, const FeatureStore& store,
                       const std::vector<std::string>& ids) {
  if (ids.empty()) throw DomainError("evaluate_model: empty id list");
  std::vector<ExampleRef> refs;
  for (const std::string& id : ids) {
    auto it = store.records.find(id);
    if (it == store.records.end())
      throw IntegrityError("feature store has no record for clip '" + id + "'");
    if (it->second.augmented)
      throw DomainError("evaluate_model: augmented record '" + id + "' is not evaluable");
    refs.push_back({id, id, it->second.label});
  }
  EvalResult r = run_eval(m.net(), store, refs, 32);
  return metrics_from_predictions(r.labels, r.predictions, m.num_classes);
}

namespace {

json config_to_json(const TrainConfig& c) {
  return json{{"regime", regime_name(c.regime)},
              {"base_lr", c.base_lr},
              {"weight_decay", c.weight_decay},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"lr_drop_epochs", c.lr_drop_epochs},
              {"drop_factor", c.drop_factor},
              {"seed", c.seed},
              {"decoupled_weight_decay", c.decoupled_weight_decay},
              {"include_augmented", c.include_augmented}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.regime = regime_from_name(j.at("regime").get<std::string>());
  c.base_lr = j.at("base_lr").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.lr_drop_epochs = j.at("lr_drop_epochs").get<std::vector<int>>();
  c.drop_factor = j.at("drop_factor").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  c.decoupled_weight_decay = j.at("decoupled_weight_decay").get<bool>();
  c.include_augmented = j.at("include_augmented").get<bool>();
  return c;
}

}  // namespace

void persist_run(const RunRecord& record, ModelHandle& m, const fs::path& run_dir) {
  fs::create_directories(run_dir);
  json j;
  j["run_id"] = record.run_id;
  j["dataset"] = record.dataset;
  if (record.fold) j["fold"] = *record.fold;
  if (record.split_seed) j["split_seed"] = *record.split_seed;
  j["architecture"] = record.architecture;
  j["init_mode"] = record.init_mode;
  j["config"] = config_to_json(record.config);
  j["final_val_accuracy"] = record.final_val_accuracy;
  j["checkpoint_dir"] = "checkpoint";
  j["wall_clock_seconds"] = record.wall_clock_seconds;
  j["diverged"] = record.diverged;
  if (record.diverged) j["diverged_epoch"] = record.diverged_epoch;
  json epochs = json::array();
  for (const EpochLog& e : record.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"lr", e.lr},
                      {"train_loss", e.train_loss},
                      {"train_accuracy", e.train_accuracy},
                      {"val_loss", e.val_loss},
                      {"val_accuracy", e.val_accuracy}});
  }
  j["epochs"] = std::move(epochs);
  write_text_file(run_dir / "record.json", j.dump(2) + "\n");

  std::ostringstream csv;
  csv << "epoch,lr,train_loss,train_accuracy,val_loss,val_accuracy\n";
  for (const EpochLog& e : record.epochs) {
    csv << e.epoch << "," << e.lr << "," << e.train_loss << "," << e.train_accuracy << ","
        << e.val_loss << "," << e.val_accuracy << "\n";
  }
  write_text_file(run_dir / "metrics.csv", csv.str());

  WeightArchive checkpoint = archive_from_model(m.net(), "run:" + record.run_id);
  save_archive(checkpoint, run_dir / "checkpoint");
}

RunRecord load_run_record(const fs::path& run_dir) {
  json j = json::parse(read_text_file(run_dir / "record.json"));
  RunRecord rec;
  rec.run_id = j.at("run_id").get<std::string>();
  rec.dataset = j.at("dataset").get<std::string>();
  if (j.contains("fold")) rec.fold = j.at("fold").get<int>();
  if (j.contains("split_seed")) rec.split_seed = j.at("split_seed").get<uint64_t>();
  rec.architecture = j.at("architecture").get<std::string>();
  rec.init_mode = j.at("init_mode").get<std::string>();
  rec.config = config_from_json(j.at("config"));
  rec.final_val_accuracy = j.at("final_val_accuracy").get<double>();
  rec.checkpoint_dir = j.value("checkpoint_dir", "checkpoint");
  rec.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  rec.diverged = j.value("diverged", false);
  rec.diverged_epoch = j.value("diverged_epoch", -1);
  for (const auto& e : j.at("epochs")) {
    EpochLog log;
    log.epoch = e.at("epoch").get<int>();
    log.lr = e.at("lr").get<double>();
    log.train_loss = e.at("train_loss").get<double>();
    log.train_accuracy = e.at("train_accuracy").get<double>();
    log.val_loss = e.at("val_loss").get<double>();
    log.val_accuracy = e.at("val_accuracy").get<double>();
    rec.epochs.push_back(log);
  }
  return rec;
}

CrossValResult cross_validate(Architecture arch, InitMode init, const WeightArchive* pretrained,
                              const FeatureStore& store, const TrainConfig& cfg,
                              uint64_t split_seed, const fs::path& runs_dir,
                              const EpochCallback& on_epoch) {
  DatasetProfile profile = dataset_profile(store.kind);
  int num_classes = store_num_classes(store);
  std::vector<FoldPlan> plans;
  if (profile.official_folds > 0) {
    for (int f = 1; f <= profile.official_folds; ++f) plans.push_back(store_fold_plan(store, f));
  } else {
    plans.push_back(store_fold_plan_seeded(store, split_seed));
  }
  CrossValResult result;
  double acc_sum = 0.0;
  size_t completed = 0;
  for (size_t i = 0; i < plans.size(); ++i) {
    uint64_t fold_seed = splitmix64(cfg.seed + i);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed;
    ModelHandle model = build_backbone(arch, init, num_classes, fold_seed, pretrained);
    std::string run_id = dataset_kind_name(store.kind) + "-" + architecture_name(arch) + "-" +
                         init_mode_name(init) + "-fold" + std::to_string(i + 1) + "-seed" +
                         std::to_string(fold_seed % 100000);
    try {
      RunRecord rec = train_model(model, store, plans[i], fold_cfg, on_epoch);
      rec.run_id = run_id;
      persist_run(rec, model, runs_dir / run_id);
      acc_sum += rec.final_val_accuracy;
      ++completed;
      result.runs.push_back(std::move(rec));
    } catch (const NumericError&) {
      RunRecord rec;
      rec.run_id = run_id;
      rec.dataset = dataset_kind_name(store.kind);
      rec.architecture = architecture_name(arch);
      rec.init_mode = init_mode_name(init);
      rec.config = fold_cfg;
      rec.diverged = true;
      result.complete = false;
      result.runs.push_back(std::move(rec));
    }
  }
  result.mean_accuracy = completed > 0 ? acc_sum / static_cast<double>(completed) : 0.0;
  return result;
}

}  // namespace auralab
