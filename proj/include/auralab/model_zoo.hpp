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
// Backbone construction and weight surgery: pretrained/random initialization,
// block-wise weight fusion, freezing, and truncation. The classifier head is
// freshly initialized in every construction path; archive classifier weights
// never survive into a built model.

#ifndef AURALAB_MODEL_ZOO_HPP_
#define AURALAB_MODEL_ZOO_HPP_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "auralab/backbones.hpp"
#include "auralab/weight_archive.hpp"

namespace auralab {

struct BlockSpec {
  std::vector<std::string> segments;  // forward-pass order
  std::map<std::string, std::vector<std::string>> segment_params;
};

struct ModelHandle {
  Architecture architecture = Architecture::kTiny;
  InitMode init_mode = InitMode::kRandom;
  int num_classes = 0;
  uint64_t seed = 0;
  std::shared_ptr<nn::Model<float>> model;

  nn::Model<float>& net() { return *model; }
  const nn::Model<float>& net() const { return *model; }
};

// Segment-rank comparison helper: true when `seg` precedes or equals
// `through` in the six-segment order.
bool segment_at_or_before(const std::string& seg, const std::string& through);

ModelHandle build_backbone(Architecture arch, InitMode init, int num_classes, uint64_t seed,
                           const WeightArchive* pretrained = nullptr);

BlockSpec list_blocks(const ModelHandle& m);

// Pretrained weights up to and including `cut`; everything later is freshly
// initialized from the seed. The whole model stays trainable.
ModelHandle fuse_weights(const WeightArchive& pretrained, const std::string& cut,
                         Architecture arch, int num_classes, uint64_t seed);

// Marks segments up to and including `frozen_through` as excluded from
// optimization ("none" clears). Idempotent.
ModelHandle& set_trainable(ModelHandle& m, const std::string& frozen_through);

// Drops segments after `last_kept` (block2..block4) and attaches global
// average pooling plus a fresh classifier; surviving weights are copied from
// the source model.
ModelHandle truncate_after(const ModelHandle& m, const std::string& last_kept, int num_classes,
                           uint64_t seed);

// FNV-1a over the raw parameter bytes of one segment (trainable params only).
uint64_t segment_checksum(const ModelHandle& m, const std::string& segment);

template <typename T>
uint64_t segment_checksum(nn::Model<T>& model, const std::string& segment) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (nn::Param<T>* p : model.params()) {
    if (p->segment != segment || p->is_buffer) continue;
    h = fnv1a(p->value.v.data(), p->value.v.size() * sizeof(T), h);
  }
  return h;
}

}  // namespace auralab

#endif  // AURALAB_MODEL_ZOO_HPP_
