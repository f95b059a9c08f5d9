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

#include "auralab/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "auralab/audio_io.hpp"

namespace auralab {

std::string dataset_kind_name(DatasetKind k) {
  switch (k) {
    case DatasetKind::kEsc50: return "esc50";
    case DatasetKind::kUrbanSound8k: return "urbansound8k";
    case DatasetKind::kGtzan: return "gtzan";
    case DatasetKind::kTones: return "tones";
  }
  return "unknown";
}

DatasetKind dataset_kind_from_name(const std::string& s) {
  if (s == "esc50") return DatasetKind::kEsc50;
  if (s == "urbansound8k" || s == "us8k") return DatasetKind::kUrbanSound8k;
  if (s == "gtzan") return DatasetKind::kGtzan;
  if (s == "tones") return DatasetKind::kTones;
  throw ConfigError("unknown dataset kind '" + s +
                    "' (want esc50, urbansound8k, gtzan, or tones)");
}

DatasetProfile dataset_profile(DatasetKind k) {
  switch (k) {
    case DatasetKind::kEsc50: return {44100, 5.0, 250, 5};
    case DatasetKind::kUrbanSound8k: return {22050, 4.0, 250, 10};
    case DatasetKind::kGtzan: return {22050, 30.0, 1500, 0};
    case DatasetKind::kTones: return {22050, 1.0, 64, 5};
  }
  throw DomainError("unknown dataset kind");
}

const ClipEntry& DatasetManifest::by_id(const std::string& clip_id) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), clip_id,
                             [](const ClipEntry& e, const std::string& id) { return e.clip_id < id; });
  if (it == entries.end() || it->clip_id != clip_id)
    throw IntegrityError("manifest has no clip '" + clip_id + "'");
  return *it;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"') quoted = false;
      else field += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw IntegrityError("metadata CSV is missing column '" + name + "'");
  }
};

Csv read_csv(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("metadata CSV not found: " + path.string());
  std::istringstream in(read_text_file(path));
  Csv csv;
  std::string line;
  if (!std::getline(in, line)) throw IntegrityError("metadata CSV is empty: " + path.string());
  csv.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    csv.rows.push_back(split_csv_line(line));
  }
  return csv;
}

void assign_labels(DatasetManifest& m) {
  std::set<std::string> names;
  for (const auto& e : m.entries) names.insert(e.class_name);
  m.class_names.assign(names.begin(), names.end());  // sorted by construction
  std::map<std::string, int> index;
  for (size_t i = 0; i < m.class_names.size(); ++i) index[m.class_names[i]] = static_cast<int>(i);
  for (auto& e : m.entries) e.label = index[e.class_name];
}

void fill_audio_info(DatasetManifest& m) {
  for (auto& e : m.entries) {
    if (!fs::exists(e.path))
      throw IntegrityError("manifest references missing audio file: " + e.path.string());
    AudioInfo info = probe_audio_file(e.path);
    e.duration_s = info.duration_seconds();
    e.source_sample_rate = info.sample_rate;
  }
}

void finalize_manifest(DatasetManifest& m) {
  assign_labels(m);
  std::sort(m.entries.begin(), m.entries.end(),
            [](const ClipEntry& a, const ClipEntry& b) { return a.clip_id < b.clip_id; });
  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    if (!ids.insert(e.clip_id).second)
      throw IntegrityError("duplicate clip_id in manifest: " + e.clip_id);
  }
  fill_audio_info(m);
}

void check_counts(const DatasetManifest& m, size_t want_entries, int want_classes, int want_folds,
                  std::optional<size_t> per_fold) {
  if (m.entries.size() != want_entries)
    throw IntegrityError(dataset_kind_name(m.kind) + " manifest has " +
                         std::to_string(m.entries.size()) + " entries, expected " +
                         std::to_string(want_entries));
  if (m.num_classes() != want_classes)
    throw IntegrityError(dataset_kind_name(m.kind) + " manifest has " +
                         std::to_string(m.num_classes()) + " classes, expected " +
                         std::to_string(want_classes));
  if (want_folds > 0) {
    std::map<int, size_t> fold_counts;
    for (const auto& e : m.entries) ++fold_counts[e.fold];
    for (int f = 1; f <= want_folds; ++f) {
      auto it = fold_counts.find(f);
      if (it == fold_counts.end())
        throw IntegrityError(dataset_kind_name(m.kind) + " manifest has no entries in fold " +
                             std::to_string(f));
      if (per_fold && it->second != *per_fold)
        throw IntegrityError(dataset_kind_name(m.kind) + " fold " + std::to_string(f) + " has " +
                             std::to_string(it->second) + " entries, expected " +
                             std::to_string(*per_fold));
    }
    if (fold_counts.size() != static_cast<size_t>(want_folds))
      throw IntegrityError(dataset_kind_name(m.kind) + " manifest has " +
                           std::to_string(fold_counts.size()) + " folds, expected " +
                           std::to_string(want_folds));
  }
}

DatasetManifest build_esc50(const fs::path& root) {
  Csv csv = read_csv(root / "meta" / "esc50.csv");
  int c_file = csv.col("filename"), c_fold = csv.col("fold"), c_cat = csv.col("category");
  DatasetManifest m;
  m.kind = DatasetKind::kEsc50;
  for (const auto& row : csv.rows) {
    ClipEntry e;
    e.path = root / "audio" / row[c_file];
    e.clip_id = fs::path(row[c_file]).stem().string();
    e.fold = std::stoi(row[c_fold]);
    e.class_name = row[c_cat];
    m.entries.push_back(std::move(e));
  }
  finalize_manifest(m);
  check_counts(m, 2000, 50, 5, 400);
  return m;
}

DatasetManifest build_urbansound8k(const fs::path& root) {
  Csv csv = read_csv(root / "metadata" / "UrbanSound8K.csv");
  int c_file = csv.col("slice_file_name"), c_fold = csv.col("fold"), c_class = csv.col("class");
  DatasetManifest m;
  m.kind = DatasetKind::kUrbanSound8k;
  for (const auto& row : csv.rows) {
    ClipEntry e;
    e.fold = std::stoi(row[c_fold]);
    e.path = root / "audio" / ("fold" + row[c_fold]) / row[c_file];
    e.clip_id = fs::path(row[c_file]).stem().string();
    e.class_name = row[c_class];
    m.entries.push_back(std::move(e));
  }
  finalize_manifest(m);
  check_counts(m, 8732, 10, 10, std::nullopt);
  return m;
}

bool is_audio_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav" || ext == ".aiff" || ext == ".aif" || ext == ".ogg";
}

// Genre-directory layout shared by GTZAN and the synthetic tones kind.
DatasetManifest build_genre_dirs(DatasetKind kind, const fs::path& root_in) {
  fs::path root = fs::exists(root_in / "genres") ? root_in / "genres" : root_in;
  if (!fs::is_directory(root)) throw IoError("dataset root is not a directory: " + root_in.string());
  DatasetManifest m;
  m.kind = kind;
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  for (const fs::path& dir : class_dirs) {
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir))
      if (f.is_regular_file() && is_audio_file(f.path())) files.push_back(f.path());
    std::sort(files.begin(), files.end());
    int index_in_class = 0;
    for (const fs::path& f : files) {
      ClipEntry e;
      e.path = f;
      e.clip_id = f.stem().string();
      e.class_name = dir.filename().string();
      // The tones kind carries synthetic round-robin folds so the folded
      // code paths are exercisable at CPU scale.
      e.fold = kind == DatasetKind::kTones ? index_in_class % 5 + 1 : 0;
      ++index_in_class;
      m.entries.push_back(std::move(e));
    }
  }
  if (m.entries.empty())
    throw IoError("no audio files found under dataset root: " + root_in.string());
  finalize_manifest(m);
  if (kind == DatasetKind::kGtzan) {
    check_counts(m, 1000, 10, 0, std::nullopt);
    std::map<std::string, size_t> per_class;
    for (const auto& e : m.entries) ++per_class[e.class_name];
    for (const auto& [name, count] : per_class) {
      if (count != 100)
        throw IntegrityError("gtzan class '" + name + "' has " + std::to_string(count) +
                             " clips, expected 100");
    }
  }
  return m;
}

}  // namespace

DatasetManifest build_manifest(DatasetKind kind, const fs::path& root_dir) {
  switch (kind) {
    case DatasetKind::kEsc50: return build_esc50(root_dir);
    case DatasetKind::kUrbanSound8k: return build_urbansound8k(root_dir);
    case DatasetKind::kGtzan: return build_genre_dirs(DatasetKind::kGtzan, root_dir);
    case DatasetKind::kTones: return build_genre_dirs(DatasetKind::kTones, root_dir);
  }
  throw DomainError("unknown dataset kind");
}

FoldPlan split_folds(const DatasetManifest& m, int fold_index) {
  int folds = dataset_profile(m.kind).official_folds;
  if (folds == 0)
    throw DomainError(dataset_kind_name(m.kind) +
                      " has no official folds; use the seeded split instead");
  if (fold_index < 1 || fold_index > folds)
    throw DomainError("fold index " + std::to_string(fold_index) + " out of range 1.." +
                      std::to_string(folds));
  FoldPlan plan;
  plan.fold_index = fold_index;
  for (const auto& e : m.entries) {
    (e.fold == fold_index ? plan.val_ids : plan.train_ids).push_back(e.clip_id);
  }
  return plan;
}

FoldPlan split_folds_seeded(const DatasetManifest& m, uint64_t seed) {
  FoldPlan plan;
  plan.seed = seed;
  std::map<int, std::vector<std::string>> by_class;
  for (const auto& e : m.entries) by_class[e.label].push_back(e.clip_id);
  Rng rng(seed);
  for (auto& [label, ids] : by_class) {
    std::sort(ids.begin(), ids.end());
    rng.shuffle(ids);
    size_t val_count = ids.size() / 5;  // 20% per class
    for (size_t i = 0; i < ids.size(); ++i)
      (i < val_count ? plan.val_ids : plan.train_ids).push_back(ids[i]);
  }
  std::sort(plan.val_ids.begin(), plan.val_ids.end());
  std::sort(plan.train_ids.begin(), plan.train_ids.end());
  return plan;
}

}  // namespace auralab
