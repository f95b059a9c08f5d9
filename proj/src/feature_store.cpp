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

#include "auralab/feature_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace auralab {

using nlohmann::json;

namespace {

uint32_t crc_of(const void* data, size_t n) {
  return static_cast<uint32_t>(
      ::crc32(0L, static_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

json spec_to_json(const WindowSpec& s) {
  return json{{"window_ms", s.window_ms}, {"hop_ms", s.hop_ms}, {"n_mels", s.n_mels},
              {"fft_size", s.fft_size}};
}

WindowSpec spec_from_json(const json& j) {
  WindowSpec s;
  s.window_ms = j.at("window_ms").get<double>();
  s.hop_ms = j.at("hop_ms").get<double>();
  s.n_mels = j.at("n_mels").get<int>();
  s.fft_size = j.at("fft_size").get<int>();
  return s;
}

json dsp_to_json(const DspConfig& c) {
  json j;
  j["channels"] = json::array({spec_to_json(c.specs[0]), spec_to_json(c.specs[1]),
                               spec_to_json(c.specs[2])});
  j["mel_scale"] = c.scale == MelScale::kSlaney ? "slaney" : "htk";
  j["target_sample_rate"] = c.target_sample_rate;
  j["tensor_width"] = c.tensor_width;
  j["nominal_seconds"] = c.nominal_seconds;
  return j;
}

DspConfig dsp_from_json(const json& j) {
  DspConfig c;
  for (int i = 0; i < 3; ++i) c.specs[i] = spec_from_json(j.at("channels").at(i));
  c.scale = j.at("mel_scale").get<std::string>() == "htk" ? MelScale::kHtk : MelScale::kSlaney;
  c.target_sample_rate = j.at("target_sample_rate").get<int>();
  c.tensor_width = j.at("tensor_width").get<int>();
  c.nominal_seconds = j.at("nominal_seconds").get<double>();
  return c;
}

}  // namespace

uint64_t DspConfig::content_hash() const {
  return fnv1a(dsp_to_json(*this).dump());
}

DspConfig dsp_config_for(DatasetKind kind) {
  DatasetProfile p = dataset_profile(kind);
  DspConfig c;
  c.target_sample_rate = p.target_sample_rate;
  c.tensor_width = p.tensor_width;
  c.nominal_seconds = p.nominal_seconds;
  return c;
}

namespace {

MelTensor extract_tensor(const Waveform& w_in, const DspConfig& cfg) {
  Waveform w = w_in;
  size_t nominal = static_cast<size_t>(cfg.nominal_seconds * cfg.target_sample_rate);
  if (w.samples.size() < nominal) w.samples.resize(nominal, 0.0f);  // right-pad short clips
  return multires_melspec(w, cfg.specs, cfg.tensor_width, cfg.scale);
}

struct PendingRecord {
  RecordInfo info;
  std::vector<float> data;
};

json store_to_json(const FeatureStore& store, const std::optional<AugmentationPolicy>& aug) {
  json j;
  j["format_version"] = 1;
  j["dataset_kind"] = dataset_kind_name(store.kind);
  j["dsp"] = dsp_to_json(store.config);
  j["dsp_config_hash"] = hex64(store.config.content_hash());
  j["dtype"] = "float32";
  j["byte_order"] = "little";
  j["layout"] = "channel-major row-major";
  j["normalization"] = store.normalization;
  if (aug) {
    j["augmentation"] = {{"stretch_rates", aug->stretch_rates},
                         {"pitch_semitones", aug->pitch_semitones}};
  } else {
    j["augmentation"] = nullptr;
  }
  json records = json::object();
  for (const auto& [name, r] : store.records) {
    records[name] = {{"clip_id", r.clip_id},   {"augmented", r.augmented},
                     {"label", r.label},       {"class_name", r.class_name},
                     {"fold", r.fold},         {"shape", r.shape},
                     {"byte_length", r.byte_length}, {"crc32", r.crc32}};
  }
  j["records"] = std::move(records);
  return j;
}

}  // namespace

FeatureStore cache_features(const DatasetManifest& m, const DspConfig& cfg,
                            const std::optional<AugmentationPolicy>& augmentation,
                            const fs::path& out_dir, CacheStats* stats, int num_threads) {
  FeatureStore store;
  store.root = out_dir;
  store.kind = m.kind;
  store.config = cfg;
  store.normalization = "per_sample_per_channel_zscore";
  fs::create_directories(out_dir / "records");

  // Reuse verified records from a previous run under the identical config.
  std::map<std::string, RecordInfo> previous;
  fs::path index_path = out_dir / "store.json";
  if (fs::exists(index_path)) {
    try {
      FeatureStore old = open_feature_store(out_dir);
      if (old.config.content_hash() == cfg.content_hash() && old.kind == m.kind)
        previous = std::move(old.records);
    } catch (const Error&) {
      // Unreadable index: rebuild from scratch.
    }
  }

  struct Task {
    const ClipEntry* entry;
    int variant;  // -1 = base record, k >= 0 = augmentation variant k
    std::string record_name;
  };
  std::vector<Task> tasks;
  for (const auto& e : m.entries) {
    tasks.push_back({&e, -1, e.clip_id});
    if (augmentation) {
      for (size_t k = 0; k < augmentation->variant_count(); ++k)
        tasks.push_back({&e, static_cast<int>(k), e.clip_id + ".aug-" + std::to_string(k)});
    }
  }

  std::vector<std::optional<RecordInfo>> results(tasks.size());
  std::vector<std::string> failures;
  std::mutex failures_mutex;
  std::atomic<size_t> next{0};
  std::atomic<size_t> written{0}, verified{0};

  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      try {
        fs::path bin_path = out_dir / "records" / (task.record_name + ".bin");
        auto prev = previous.find(task.record_name);
        if (prev != previous.end() && fs::exists(bin_path)) {
          // Verify instead of rewriting.
          std::vector<unsigned char> bytes = read_binary_file(bin_path);
          if (bytes.size() == prev->second.byte_length &&
              crc_of(bytes.data(), bytes.size()) == prev->second.crc32) {
            RecordInfo info = prev->second;
            info.label = task.entry->label;  // labels follow the manifest
            info.class_name = task.entry->class_name;
            info.fold = task.entry->fold;
            results[i] = info;
            verified.fetch_add(1);
            continue;
          }
        }
        Waveform w = load_audio(task.entry->path, cfg.target_sample_rate);
        if (task.variant >= 0)
          w = apply_augmentation(w, *augmentation, static_cast<size_t>(task.variant));
        MelTensor t = extract_tensor(w, cfg);
        for (float v : t.values) {
          if (!std::isfinite(v)) throw NumericError("non-finite feature value");
        }
        size_t bytes = t.values.size() * sizeof(float);
        write_binary_file(bin_path, t.values.data(), bytes);
        RecordInfo info;
        info.name = task.record_name;
        info.clip_id = task.entry->clip_id;
        info.augmented = task.variant >= 0;
        info.label = task.entry->label;
        info.class_name = task.entry->class_name;
        info.fold = task.entry->fold;
        info.shape = {MelTensor::kChannels, t.n_mels, t.width};
        info.byte_length = bytes;
        info.crc32 = crc_of(t.values.data(), bytes);
        results[i] = info;
        written.fetch_add(1);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(failures_mutex);
        failures.push_back(task.record_name + ": " + ex.what());
      }
    }
  };

  int threads = num_threads > 0 ? num_threads
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (threads <= 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::ostringstream msg;
    msg << "feature extraction failed for " << failures.size() << " record(s):";
    for (const auto& f : failures) msg << "\n  " << f;
    throw IntegrityError(msg.str());
  }

  for (auto& r : results) {
    store.records[r->name] = std::move(*r);
  }
  // The index is written once, atomically, after every record succeeded.
  fs::path tmp = out_dir / "store.json.tmp";
  write_text_file(tmp, store_to_json(store, augmentation).dump(2) + "\n");
  fs::rename(tmp, index_path);
  if (stats) {
    stats->written = written.load();
    stats->verified = verified.load();
  }
  return store;
}

FeatureStore open_feature_store(const fs::path& dir) {
  fs::path index_path = dir / "store.json";
  if (!fs::exists(index_path))
    throw IoError("feature store index not found: " + index_path.string() +
                  " (run `prep` first)");
  json j = json::parse(read_text_file(index_path));
  FeatureStore store;
  store.root = dir;
  store.kind = dataset_kind_from_name(j.at("dataset_kind").get<std::string>());
  store.config = dsp_from_json(j.at("dsp"));
  store.normalization = j.value("normalization", "per_sample_per_channel_zscore");
  for (const auto& [name, r] : j.at("records").items()) {
    RecordInfo info;
    info.name = name;
    info.clip_id = r.at("clip_id").get<std::string>();
    info.augmented = r.at("augmented").get<bool>();
    info.label = r.at("label").get<int>();
    info.class_name = r.at("class_name").get<std::string>();
    info.fold = r.value("fold", 0);
    info.shape = r.at("shape").get<std::vector<int>>();
    info.byte_length = r.at("byte_length").get<size_t>();
    info.crc32 = r.at("crc32").get<uint32_t>();
    store.records[name] = std::move(info);
  }
  return store;
}

std::vector<ExampleRef> load_examples(const FeatureStore& store, const FoldPlan& plan, Split split,
                                      bool include_augmented) {
  const std::vector<std::string>& ids = split == Split::kTrain ? plan.train_ids : plan.val_ids;
  std::vector<ExampleRef> out;
  for (const std::string& id : ids) {
    auto it = store.records.find(id);
    if (it == store.records.end())
      throw IntegrityError("feature store has no record for clip '" + id + "'");
    out.push_back({id, id, it->second.label});
  }
  // Augmented records are train-only; validation never sees them.
  if (split == Split::kTrain && include_augmented) {
    std::set<std::string> train_set(ids.begin(), ids.end());
    for (const auto& [name, r] : store.records) {
      if (r.augmented && train_set.count(r.clip_id))
        out.push_back({name, r.clip_id, r.label});
    }
  }
  return out;
}

MelTensor load_record(const FeatureStore& store, const std::string& record_name, bool normalized) {
  auto it = store.records.find(record_name);
  if (it == store.records.end())
    throw IntegrityError("feature store has no record '" + record_name + "'");
  const RecordInfo& info = it->second;
  std::vector<unsigned char> bytes = read_binary_file(store.record_path(record_name));
  if (bytes.size() != info.byte_length)
    throw IntegrityError("record '" + record_name + "' has " + std::to_string(bytes.size()) +
                         " bytes, index says " + std::to_string(info.byte_length));
  if (crc_of(bytes.data(), bytes.size()) != info.crc32)
    throw IntegrityError("record '" + record_name + "' failed its checksum");
  MelTensor t;
  t.n_mels = info.shape.at(1);
  t.width = info.shape.at(2);
  t.channel_specs = store.config.specs;
  t.values.resize(bytes.size() / sizeof(float));
  std::memcpy(t.values.data(), bytes.data(), bytes.size());
  return normalized ? normalize_tensor(t) : t;
}

int store_num_classes(const FeatureStore& store) {
  int max_label = -1;
  for (const auto& [name, r] : store.records) max_label = std::max(max_label, r.label);
  if (max_label < 0) throw IntegrityError("feature store has no records");
  return max_label + 1;
}

FoldPlan store_fold_plan(const FeatureStore& store, int fold_index) {
  int folds = dataset_profile(store.kind).official_folds;
  if (folds == 0)
    throw DomainError(dataset_kind_name(store.kind) +
                      " has no official folds; use the seeded split instead");
  if (fold_index < 1 || fold_index > folds)
    throw DomainError("fold index " + std::to_string(fold_index) + " out of range 1.." +
                      std::to_string(folds));
  FoldPlan plan;
  plan.fold_index = fold_index;
  for (const auto& [name, r] : store.records) {  // map order == sorted by name
    if (r.augmented) continue;
    (r.fold == fold_index ? plan.val_ids : plan.train_ids).push_back(r.clip_id);
  }
  return plan;
}

FoldPlan store_fold_plan_seeded(const FeatureStore& store, uint64_t seed) {
  FoldPlan plan;
  plan.seed = seed;
  std::map<int, std::vector<std::string>> by_class;
  for (const auto& [name, r] : store.records) {
    if (!r.augmented) by_class[r.label].push_back(r.clip_id);
  }
  Rng rng(seed);
  for (auto& [label, ids] : by_class) {
    std::sort(ids.begin(), ids.end());
    rng.shuffle(ids);
    size_t val_count = ids.size() / 5;
    for (size_t i = 0; i < ids.size(); ++i)
      (i < val_count ? plan.val_ids : plan.train_ids).push_back(ids[i]);
  }
  std::sort(plan.val_ids.begin(), plan.val_ids.end());
  std::sort(plan.train_ids.begin(), plan.train_ids.end());
  return plan;
}

}  // namespace auralab
