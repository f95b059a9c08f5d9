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

#include "auralab/model_zoo.hpp"

#include <algorithm>

namespace auralab {

std::string architecture_name(Architecture a) {
  switch (a) {
    case Architecture::kTiny: return "tiny";
    case Architecture::kDenseNet201: return "densenet201";
    case Architecture::kResNet50: return "resnet50";
    case Architecture::kInceptionV3: return "inceptionv3";
  }
  return "unknown";
}

Architecture architecture_from_name(const std::string& s) {
  if (s == "tiny") return Architecture::kTiny;
  if (s == "densenet201" || s == "densenet") return Architecture::kDenseNet201;
  if (s == "resnet50" || s == "resnet") return Architecture::kResNet50;
  if (s == "inceptionv3" || s == "inception") return Architecture::kInceptionV3;
  throw ConfigError("unknown architecture '" + s +
                    "' (want tiny, densenet201, resnet50, or inceptionv3)");
}

std::string init_mode_name(InitMode m) {
  return m == InitMode::kPretrained ? "pretrained" : "random";
}

InitMode init_mode_from_name(const std::string& s) {
  if (s == "pretrained") return InitMode::kPretrained;
  if (s == "random") return InitMode::kRandom;
  throw ConfigError("unknown init mode '" + s + "' (want pretrained or random)");
}

bool segment_at_or_before(const std::string& seg, const std::string& through) {
  const auto& segs = six_segments();
  auto pos = [&](const std::string& s) {
    for (size_t i = 0; i < segs.size(); ++i)
      if (segs[i] == s) return static_cast<int>(i);
    throw DomainError("unknown segment: " + s);
  };
  return pos(seg) <= pos(through);
}

ModelHandle build_backbone(Architecture arch, InitMode init, int num_classes, uint64_t seed,
                           const WeightArchive* pretrained) {
  if (num_classes < 2) throw ConfigError("build_backbone: need at least 2 classes");
  if (init == InitMode::kPretrained && pretrained == nullptr)
    throw ConfigError("build_backbone: pretrained init requires a weight archive");
  ModelHandle h;
  h.architecture = arch;
  h.init_mode = init;
  h.num_classes = num_classes;
  h.seed = seed;
  h.model = std::make_shared<nn::Model<float>>();
  build_architecture(*h.model, arch, num_classes);
  Rng rng(seed);
  init_params(*h.model, rng);
  if (init == InitMode::kPretrained) {
    // The archive's classification head (if any) is always discarded.
    load_into_model(*pretrained, *h.model,
                    [](const std::string& seg) { return seg != "classifier"; });
  }
  return h;
}

BlockSpec list_blocks(const ModelHandle& m) {
  BlockSpec spec;
  spec.segments = m.net().segments();
  for (nn::Param<float>* p : const_cast<nn::Model<float>&>(m.net()).params())
    spec.segment_params[p->segment].push_back(p->name);
  for (auto& [seg, names] : spec.segment_params) std::sort(names.begin(), names.end());
  return spec;
}

ModelHandle fuse_weights(const WeightArchive& pretrained, const std::string& cut,
                         Architecture arch, int num_classes, uint64_t seed) {
  if (cut == "classifier")
    throw DomainError("fuse_weights: the classifier is never taken from the archive");
  (void)segment_at_or_before(cut, cut);  // validates the segment name
  ModelHandle h;
  h.architecture = arch;
  h.init_mode = InitMode::kPretrained;
  h.num_classes = num_classes;
  h.seed = seed;
  h.model = std::make_shared<nn::Model<float>>();
  build_architecture(*h.model, arch, num_classes);
  Rng rng(seed);
  init_params(*h.model, rng);
  load_into_model(pretrained, *h.model, [&](const std::string& seg) {
    return seg != "classifier" && segment_at_or_before(seg, cut);
  });
  return h;
}

ModelHandle& set_trainable(ModelHandle& m, const std::string& frozen_through) {
  m.net().set_frozen_through(frozen_through);
  return m;
}

ModelHandle truncate_after(const ModelHandle& m, const std::string& last_kept, int num_classes,
                           uint64_t seed) {
  int keep = 0;
  if (last_kept == "block2") keep = 2;
  else if (last_kept == "block3") keep = 3;
  else if (last_kept == "block4") keep = 4;
  else
    throw DomainError("truncate_after: last_kept must be block2, block3, or block4, got '" +
                      last_kept + "'");
  ModelHandle h;
  h.architecture = m.architecture;
  h.init_mode = m.init_mode;
  h.num_classes = num_classes;
  h.seed = seed;
  h.model = std::make_shared<nn::Model<float>>();
  build_architecture(*h.model, m.architecture, num_classes, keep);
  Rng rng(seed);
  init_params(*h.model, rng);
  WeightArchive source = archive_from_model(const_cast<nn::Model<float>&>(m.net()), "truncation-source");
  load_into_model(source, *h.model, [&](const std::string& seg) {
    return seg != "classifier" && segment_at_or_before(seg, last_kept);
  });
  return h;
}

uint64_t segment_checksum(const ModelHandle& m, const std::string& segment) {
  return segment_checksum(const_cast<nn::Model<float>&>(m.net()), segment);
}

}  // namespace auralab
