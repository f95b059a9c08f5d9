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
// Backbone topology builders. Every architecture exposes the same six-segment
// partition {stem, block1..block4, classifier}; probe points are registered
// at each segment's output. `keep_through_block` builds a truncated topology
// (global average pooling and the classifier attach to the surviving block).

#ifndef AURALAB_BACKBONES_HPP_
#define AURALAB_BACKBONES_HPP_

#include <string>
#include <vector>

#include "auralab/nn.hpp"

namespace auralab {

enum class Architecture { kTiny, kDenseNet201, kResNet50, kInceptionV3 };
enum class InitMode { kPretrained, kRandom };

std::string architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& s);
std::string init_mode_name(InitMode m);
InitMode init_mode_from_name(const std::string& s);

inline const std::vector<std::string>& six_segments() {
  static const std::vector<std::string> segs = {"stem",   "block1", "block2",
                                                "block3", "block4", "classifier"};
  return segs;
}

namespace detail {

template <typename T>
struct GraphBuilder {
  nn::Model<T>& m;
  int layer_counter = 0;

  std::string uniq(const std::string& base) {
    return base + "_" + std::to_string(layer_counter++);
  }

  int conv(const std::string& name, const std::string& seg, int in, int in_c, int out_c, int kh,
           int kw, int stride, int pad_h, int pad_w, bool bias = false) {
    return m.add(name, seg, std::make_unique<nn::Conv2d<T>>(in_c, out_c, kh, kw, stride, pad_h,
                                                            pad_w, bias),
                 {in});
  }
  int bn(const std::string& name, const std::string& seg, int in, int c) {
    return m.add(name, seg, std::make_unique<nn::BatchNorm2d<T>>(c), {in});
  }
  int relu(const std::string& name, const std::string& seg, int in) {
    return m.add(name, seg, std::make_unique<nn::ReLU<T>>(), {in});
  }
  int maxpool(const std::string& name, const std::string& seg, int in, int k, int s, int p) {
    return m.add(name, seg, std::make_unique<nn::MaxPool2d<T>>(k, s, p), {in});
  }
  int avgpool(const std::string& name, const std::string& seg, int in, int k, int s, int p = 0) {
    return m.add(name, seg, std::make_unique<nn::AvgPool2d<T>>(k, s, p), {in});
  }
  int gap(const std::string& name, const std::string& seg, int in) {
    return m.add(name, seg, std::make_unique<nn::GlobalAvgPool<T>>(), {in});
  }
  int linear(const std::string& name, const std::string& seg, int in, int in_f, int out_f) {
    return m.add(name, seg, std::make_unique<nn::Linear<T>>(in_f, out_f), {in});
  }
  int concat(const std::string& name, const std::string& seg, std::vector<int> ins) {
    return m.add(name, seg, std::make_unique<nn::ConcatChannels<T>>(), std::move(ins));
  }
  int add2(const std::string& name, const std::string& seg, int a, int b) {
    return m.add(name, seg, std::make_unique<nn::ElemAdd<T>>(), {a, b});
  }

  // conv -> bn -> relu, the BasicConv2d idiom.
  int cbr(const std::string& name, const std::string& seg, int in, int in_c, int out_c, int kh,
          int kw, int stride, int pad_h, int pad_w) {
    int c = conv(name + ".conv", seg, in, in_c, out_c, kh, kw, stride, pad_h, pad_w, false);
    int b = bn(name + ".bn", seg, c, out_c);
    return relu(name + ".relu", seg, b);
  }
};

}  // namespace detail

// Deterministic parameter initialization: He-normal for conv weights,
// uniform(-1/sqrt(fan_in), +) for linear layers, batch-norm at identity.
template <typename T>
void init_params(nn::Model<T>& model, Rng& rng) {
  for (size_t i = 1; i < model.node_count(); ++i) {
    // const_cast is contained here: builders own the model they initialize.
    auto& node = const_cast<nn::Node<T>&>(model.node(i));
    if (auto* conv = dynamic_cast<nn::Conv2d<T>*>(node.op.get())) {
      auto& w = conv->weight_.value;
      size_t fan_in = static_cast<size_t>(w.dim(1)) * w.dim(2) * w.dim(3);
      double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
      for (auto& v : w.v) v = static_cast<T>(rng.gaussian() * std_dev);
      if (!conv->bias_.value.empty()) conv->bias_.value.zero();
    } else if (auto* lin = dynamic_cast<nn::Linear<T>*>(node.op.get())) {
      size_t fan_in = static_cast<size_t>(lin->weight_.value.dim(1));
      double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (auto& v : lin->weight_.value.v) v = static_cast<T>(rng.uniform(-k, k));
      for (auto& v : lin->bias_.value.v) v = static_cast<T>(rng.uniform(-k, k));
    }
    // Batch norm keeps its identity initialization.
  }
}

// Four stages of two 3x3 conv layers at 16/32/64/128 channels, stride-2 stem,
// 2x2 max pooling per block. Small enough for CPU-scale training and every
// surgery/analysis test.
template <typename T>
void build_tiny_backbone(nn::Model<T>& m, int num_classes, int keep_through_block = 4) {
  detail::GraphBuilder<T> g{m};
  m.set_segments(six_segments());
  int x = g.conv("stem.conv", "stem", 0, 3, 16, 3, 3, 2, 1, 1, false);
  x = g.bn("stem.norm", "stem", x, 16);
  x = g.relu("stem.relu", "stem", x);
  m.set_segment_output("stem", x);
  const int widths[4] = {16, 32, 64, 128};
  int in_c = 16;
  for (int b = 1; b <= keep_through_block; ++b) {
    std::string seg = "block" + std::to_string(b);
    int out_c = widths[b - 1];
    for (int layer = 1; layer <= 2; ++layer) {
      std::string base = seg + ".layer" + std::to_string(layer);
      x = g.conv(base + ".conv", seg, x, in_c, out_c, 3, 3, 1, 1, 1, false);
      x = g.bn(base + ".norm", seg, x, out_c);
      x = g.relu(base + ".relu", seg, x);
      in_c = out_c;
    }
    x = g.maxpool(seg + ".pool", seg, x, 2, 2, 0);
    m.set_segment_output(seg, x);
  }
  x = g.gap("classifier.pool", "classifier", x);
  x = g.linear("classifier.fc", "classifier", x, in_c, num_classes);
  m.set_segment_output("classifier", x);
}

// DenseNet-201: growth 32, bottleneck factor 4, dense blocks of
// {6, 12, 48, 32} composite layers, 0.5-compression transitions. Transitions
// belong to the preceding block; the final batch norm belongs to block4.
template <typename T>
void build_densenet201(nn::Model<T>& m, int num_classes, int keep_through_block = 4) {
  detail::GraphBuilder<T> g{m};
  m.set_segments(six_segments());
  constexpr int kGrowth = 32;
  constexpr int kBnSize = 4;
  const int layers_per_block[4] = {6, 12, 48, 32};

  int x = g.conv("stem.conv0", "stem", 0, 3, 64, 7, 7, 2, 3, 3, false);
  x = g.bn("stem.norm0", "stem", x, 64);
  x = g.relu("stem.relu0", "stem", x);
  x = g.maxpool("stem.pool0", "stem", x, 3, 2, 1);
  m.set_segment_output("stem", x);

  int channels = 64;
  for (int b = 1; b <= keep_through_block; ++b) {
    std::string seg = "block" + std::to_string(b);
    for (int layer = 1; layer <= layers_per_block[b - 1]; ++layer) {
      std::string base = seg + ".denselayer" + std::to_string(layer);
      int y = g.bn(base + ".norm1", seg, x, channels);
      y = g.relu(base + ".relu1", seg, y);
      y = g.conv(base + ".conv1", seg, y, channels, kBnSize * kGrowth, 1, 1, 1, 0, 0, false);
      y = g.bn(base + ".norm2", seg, y, kBnSize * kGrowth);
      y = g.relu(base + ".relu2", seg, y);
      y = g.conv(base + ".conv2", seg, y, kBnSize * kGrowth, kGrowth, 3, 3, 1, 1, 1, false);
      x = g.concat(base + ".concat", seg, {x, y});
      channels += kGrowth;
    }
    if (b < 4 && b < keep_through_block) {
      std::string base = seg + ".transition";
      x = g.bn(base + ".norm", seg, x, channels);
      x = g.relu(base + ".relu", seg, x);
      channels /= 2;
      x = g.conv(base + ".conv", seg, x, channels * 2, channels, 1, 1, 1, 0, 0, false);
      x = g.avgpool(base + ".pool", seg, x, 2, 2);
    } else if (b == 4) {
      x = g.bn(seg + ".norm5", seg, x, channels);
    }
    m.set_segment_output(seg, x);
  }

  x = g.relu("classifier.relu", "classifier", x);
  x = g.gap("classifier.pool", "classifier", x);
  x = g.linear("classifier.fc", "classifier", x, channels, num_classes);
  m.set_segment_output("classifier", x);
}

// ResNet-50: bottleneck stages of {3, 4, 6, 3} blocks.
template <typename T>
void build_resnet50(nn::Model<T>& m, int num_classes, int keep_through_block = 4) {
  detail::GraphBuilder<T> g{m};
  m.set_segments(six_segments());
  const int blocks_per_stage[4] = {3, 4, 6, 3};
  const int mid_c[4] = {64, 128, 256, 512};

  int x = g.conv("stem.conv1", "stem", 0, 3, 64, 7, 7, 2, 3, 3, false);
  x = g.bn("stem.bn1", "stem", x, 64);
  x = g.relu("stem.relu", "stem", x);
  x = g.maxpool("stem.pool", "stem", x, 3, 2, 1);
  m.set_segment_output("stem", x);

  int in_c = 64;
  for (int b = 1; b <= keep_through_block; ++b) {
    std::string seg = "block" + std::to_string(b);
    int mid = mid_c[b - 1];
    int out_c = mid * 4;
    int stride = b == 1 ? 1 : 2;
    for (int blk = 1; blk <= blocks_per_stage[b - 1]; ++blk) {
      std::string base = seg + ".unit" + std::to_string(blk);
      int s = blk == 1 ? stride : 1;
      int identity = x;
      int y = g.conv(base + ".conv1", seg, x, in_c, mid, 1, 1, 1, 0, 0, false);
      y = g.bn(base + ".bn1", seg, y, mid);
      y = g.relu(base + ".relu1", seg, y);
      y = g.conv(base + ".conv2", seg, y, mid, mid, 3, 3, s, 1, 1, false);
      y = g.bn(base + ".bn2", seg, y, mid);
      y = g.relu(base + ".relu2", seg, y);
      y = g.conv(base + ".conv3", seg, y, mid, out_c, 1, 1, 1, 0, 0, false);
      y = g.bn(base + ".bn3", seg, y, out_c);
      if (blk == 1 && (s != 1 || in_c != out_c)) {
        identity = g.conv(base + ".downsample.conv", seg, x, in_c, out_c, 1, 1, s, 0, 0, false);
        identity = g.bn(base + ".downsample.bn", seg, identity, out_c);
      }
      y = g.add2(base + ".add", seg, y, identity);
      x = g.relu(base + ".relu3", seg, y);
      in_c = out_c;
    }
    m.set_segment_output(seg, x);
  }

  x = g.gap("classifier.pool", "classifier", x);
  x = g.linear("classifier.fc", "classifier", x, in_c, num_classes);
  m.set_segment_output("classifier", x);
}

namespace detail {

template <typename T>
int inception_a(GraphBuilder<T>& g, const std::string& base, const std::string& seg, int x,
                int in_c, int pool_c) {
  int b1 = g.cbr(base + ".branch1x1", seg, x, in_c, 64, 1, 1, 1, 0, 0);
  int b5 = g.cbr(base + ".branch5x5_1", seg, x, in_c, 48, 1, 1, 1, 0, 0);
  b5 = g.cbr(base + ".branch5x5_2", seg, b5, 48, 64, 5, 5, 1, 2, 2);
  int b3 = g.cbr(base + ".branch3x3dbl_1", seg, x, in_c, 64, 1, 1, 1, 0, 0);
  b3 = g.cbr(base + ".branch3x3dbl_2", seg, b3, 64, 96, 3, 3, 1, 1, 1);
  b3 = g.cbr(base + ".branch3x3dbl_3", seg, b3, 96, 96, 3, 3, 1, 1, 1);
  int bp = g.avgpool(base + ".branch_pool.avg", seg, x, 3, 1, 1);
  bp = g.cbr(base + ".branch_pool", seg, bp, in_c, pool_c, 1, 1, 1, 0, 0);
  return g.concat(base + ".concat", seg, {b1, b5, b3, bp});
}

template <typename T>
int inception_b(GraphBuilder<T>& g, const std::string& base, const std::string& seg, int x,
                int in_c) {
  int b3 = g.cbr(base + ".branch3x3", seg, x, in_c, 384, 3, 3, 2, 0, 0);
  int bd = g.cbr(base + ".branch3x3dbl_1", seg, x, in_c, 64, 1, 1, 1, 0, 0);
  bd = g.cbr(base + ".branch3x3dbl_2", seg, bd, 64, 96, 3, 3, 1, 1, 1);
  bd = g.cbr(base + ".branch3x3dbl_3", seg, bd, 96, 96, 3, 3, 2, 0, 0);
  int bp = g.maxpool(base + ".branch_pool", seg, x, 3, 2, 0);
  return g.concat(base + ".concat", seg, {b3, bd, bp});
}

template <typename T>
int inception_c(GraphBuilder<T>& g, const std::string& base, const std::string& seg, int x,
                int in_c, int c7) {
  int b1 = g.cbr(base + ".branch1x1", seg, x, in_c, 192, 1, 1, 1, 0, 0);
  int b7 = g.cbr(base + ".branch7x7_1", seg, x, in_c, c7, 1, 1, 1, 0, 0);
  b7 = g.cbr(base + ".branch7x7_2", seg, b7, c7, c7, 1, 7, 1, 0, 3);
  b7 = g.cbr(base + ".branch7x7_3", seg, b7, c7, 192, 7, 1, 1, 3, 0);
  int bd = g.cbr(base + ".branch7x7dbl_1", seg, x, in_c, c7, 1, 1, 1, 0, 0);
  bd = g.cbr(base + ".branch7x7dbl_2", seg, bd, c7, c7, 7, 1, 1, 3, 0);
  bd = g.cbr(base + ".branch7x7dbl_3", seg, bd, c7, c7, 1, 7, 1, 0, 3);
  bd = g.cbr(base + ".branch7x7dbl_4", seg, bd, c7, c7, 7, 1, 1, 3, 0);
  bd = g.cbr(base + ".branch7x7dbl_5", seg, bd, c7, 192, 1, 7, 1, 0, 3);
  int bp = g.avgpool(base + ".branch_pool.avg", seg, x, 3, 1, 1);
  bp = g.cbr(base + ".branch_pool", seg, bp, in_c, 192, 1, 1, 1, 0, 0);
  return g.concat(base + ".concat", seg, {b1, b7, bd, bp});
}

template <typename T>
int inception_d(GraphBuilder<T>& g, const std::string& base, const std::string& seg, int x,
                int in_c) {
  int b3 = g.cbr(base + ".branch3x3_1", seg, x, in_c, 192, 1, 1, 1, 0, 0);
  b3 = g.cbr(base + ".branch3x3_2", seg, b3, 192, 320, 3, 3, 2, 0, 0);
  int b7 = g.cbr(base + ".branch7x7x3_1", seg, x, in_c, 192, 1, 1, 1, 0, 0);
  b7 = g.cbr(base + ".branch7x7x3_2", seg, b7, 192, 192, 1, 7, 1, 0, 3);
  b7 = g.cbr(base + ".branch7x7x3_3", seg, b7, 192, 192, 7, 1, 1, 3, 0);
  b7 = g.cbr(base + ".branch7x7x3_4", seg, b7, 192, 192, 3, 3, 2, 0, 0);
  int bp = g.maxpool(base + ".branch_pool", seg, x, 3, 2, 0);
  return g.concat(base + ".concat", seg, {b3, b7, bp});
}

template <typename T>
int inception_e(GraphBuilder<T>& g, const std::string& base, const std::string& seg, int x,
                int in_c) {
  int b1 = g.cbr(base + ".branch1x1", seg, x, in_c, 320, 1, 1, 1, 0, 0);
  int b3 = g.cbr(base + ".branch3x3_1", seg, x, in_c, 384, 1, 1, 1, 0, 0);
  int b3a = g.cbr(base + ".branch3x3_2a", seg, b3, 384, 384, 1, 3, 1, 0, 1);
  int b3b = g.cbr(base + ".branch3x3_2b", seg, b3, 384, 384, 3, 1, 1, 1, 0);
  int b3c = g.concat(base + ".branch3x3_cat", seg, {b3a, b3b});
  int bd = g.cbr(base + ".branch3x3dbl_1", seg, x, in_c, 448, 1, 1, 1, 0, 0);
  bd = g.cbr(base + ".branch3x3dbl_2", seg, bd, 448, 384, 3, 3, 1, 1, 1);
  int bda = g.cbr(base + ".branch3x3dbl_3a", seg, bd, 384, 384, 1, 3, 1, 0, 1);
  int bdb = g.cbr(base + ".branch3x3dbl_3b", seg, bd, 384, 384, 3, 1, 1, 1, 0);
  int bdc = g.concat(base + ".branch3x3dbl_cat", seg, {bda, bdb});
  int bp = g.avgpool(base + ".branch_pool.avg", seg, x, 3, 1, 1);
  bp = g.cbr(base + ".branch_pool", seg, bp, in_c, 192, 1, 1, 1, 0, 0);
  return g.concat(base + ".concat", seg, {b1, b3c, bdc, bp});
}

}  // namespace detail

// Inception-v3 without the auxiliary head. Block boundaries: block1 = the
// 35x35 modules, block2 = the 17x17 reduction plus two 17x17 modules,
// block3 = the remaining 17x17 modules, block4 = the 8x8 modules.
template <typename T>
void build_inceptionv3(nn::Model<T>& m, int num_classes, int keep_through_block = 4) {
  detail::GraphBuilder<T> g{m};
  m.set_segments(six_segments());
  int x = g.cbr("stem.conv1a", "stem", 0, 3, 32, 3, 3, 2, 0, 0);
  x = g.cbr("stem.conv2a", "stem", x, 32, 32, 3, 3, 1, 0, 0);
  x = g.cbr("stem.conv2b", "stem", x, 32, 64, 3, 3, 1, 1, 1);
  x = g.maxpool("stem.pool1", "stem", x, 3, 2, 0);
  x = g.cbr("stem.conv3b", "stem", x, 64, 80, 1, 1, 1, 0, 0);
  x = g.cbr("stem.conv4a", "stem", x, 80, 192, 3, 3, 1, 0, 0);
  x = g.maxpool("stem.pool2", "stem", x, 3, 2, 0);
  m.set_segment_output("stem", x);

  int out_channels = 192;
  if (keep_through_block >= 1) {
    x = detail::inception_a(g, "block1.mixed5b", "block1", x, 192, 32);
    x = detail::inception_a(g, "block1.mixed5c", "block1", x, 256, 64);
    x = detail::inception_a(g, "block1.mixed5d", "block1", x, 288, 64);
    m.set_segment_output("block1", x);
    out_channels = 288;
  }
  if (keep_through_block >= 2) {
    x = detail::inception_b(g, "block2.mixed6a", "block2", x, 288);
    x = detail::inception_c(g, "block2.mixed6b", "block2", x, 768, 128);
    x = detail::inception_c(g, "block2.mixed6c", "block2", x, 768, 160);
    m.set_segment_output("block2", x);
    out_channels = 768;
  }
  if (keep_through_block >= 3) {
    x = detail::inception_c(g, "block3.mixed6d", "block3", x, 768, 160);
    x = detail::inception_c(g, "block3.mixed6e", "block3", x, 768, 192);
    m.set_segment_output("block3", x);
    out_channels = 768;
  }
  if (keep_through_block >= 4) {
    x = detail::inception_d(g, "block4.mixed7a", "block4", x, 768);
    x = detail::inception_e(g, "block4.mixed7b", "block4", x, 1280);
    x = detail::inception_e(g, "block4.mixed7c", "block4", x, 2048);
    m.set_segment_output("block4", x);
    out_channels = 2048;
  }
  x = g.gap("classifier.pool", "classifier", x);
  x = g.linear("classifier.fc", "classifier", x, out_channels, num_classes);
  m.set_segment_output("classifier", x);
}

template <typename T>
void build_architecture(nn::Model<T>& m, Architecture arch, int num_classes,
                        int keep_through_block = 4) {
  if (keep_through_block < 2 || keep_through_block > 4)
    throw DomainError("truncation must keep at least block2 and at most block4");
  switch (arch) {
    case Architecture::kTiny:
      build_tiny_backbone(m, num_classes, keep_through_block);
      return;
    case Architecture::kDenseNet201:
      build_densenet201(m, num_classes, keep_through_block);
      return;
    case Architecture::kResNet50:
      build_resnet50(m, num_classes, keep_through_block);
      return;
    case Architecture::kInceptionV3:
      build_inceptionv3(m, num_classes, keep_through_block);
      return;
  }
  throw DomainError("unknown architecture");
}

}  // namespace auralab

#endif  // AURALAB_BACKBONES_HPP_
