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
// Named-tensor archive on disk: weights.bin (packed little-endian float32)
// plus archive.json (name -> shape, dtype, byte offset, and provenance).

#ifndef AURALAB_WEIGHT_ARCHIVE_HPP_
#define AURALAB_WEIGHT_ARCHIVE_HPP_

#include <map>
#include <string>
#include <vector>

#include "auralab/common.hpp"
#include "auralab/nn.hpp"

namespace auralab {

struct WeightArchive {
  struct Entry {
    std::vector<int> shape;
    std::vector<float> data;
  };
  // Insertion order preserved for byte layout stability.
  std::vector<std::string> order;
  std::map<std::string, Entry> tensors;
  std::string provenance;  // free-form tag: pretrained source or run checkpoint

  bool has(const std::string& name) const { return tensors.count(name) != 0; }
  void put(const std::string& name, std::vector<int> shape, std::vector<float> data);
};

// Snapshot of every parameter and buffer, keyed by parameter name.
template <typename T>
WeightArchive archive_from_model(nn::Model<T>& model, const std::string& provenance) {
  WeightArchive a;
  a.provenance = provenance;
  for (nn::Param<T>* p : model.params()) {
    std::vector<float> data(p->value.v.size());
    for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(p->value.v[i]);
    a.put(p->name, p->value.shape, std::move(data));
  }
  return a;
}

// Copies archive tensors into the model for every parameter whose segment
// passes `want_segment`. Shape mismatches and absent names are integrity
// errors.
template <typename T, typename SegmentFilter>
void load_into_model(const WeightArchive& a, nn::Model<T>& model, SegmentFilter want_segment) {
  for (nn::Param<T>* p : model.params()) {
    if (!want_segment(p->segment)) continue;
    auto it = a.tensors.find(p->name);
    if (it == a.tensors.end())
      throw IntegrityError("weight archive is missing tensor '" + p->name + "'");
    if (it->second.shape != p->value.shape)
      throw IntegrityError("weight archive shape mismatch for tensor '" + p->name + "'");
    for (size_t i = 0; i < p->value.v.size(); ++i)
      p->value.v[i] = static_cast<T>(it->second.data[i]);
  }
}

void save_archive(const WeightArchive& a, const fs::path& dir);
WeightArchive load_archive(const fs::path& dir);

// Converts a directory of .npy files (one tensor per file, file stem is the
// tensor name) into archive format. Accepts <f4 and <f8 arrays.
WeightArchive import_npy_dir(const fs::path& npy_dir, const std::string& provenance);

}  // namespace auralab

#endif  // AURALAB_WEIGHT_ARCHIVE_HPP_
