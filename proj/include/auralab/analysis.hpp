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
// The four transfer-learning probes (SVCCA weights change, weight fusion,
// weight freeze, model cutoff) plus integrated-gradients attribution.

#ifndef AURALAB_ANALYSIS_HPP_
#define AURALAB_ANALYSIS_HPP_

#include <string>
#include <vector>

#include "auralab/image.hpp"
#include "auralab/linalg.hpp"
#include "auralab/train.hpp"

namespace auralab {

struct ActivationMatrix {
  Mat values;  // N x D: per-example channel-wise spatial means
  std::string probe_point;
  std::string model_id;
};

// Channel-averaged activations at each probe point, rows ordered by `ids`.
std::vector<ActivationMatrix> capture_activations(ModelHandle& m,
                                                  const std::vector<std::string>& probe_points,
                                                  const FeatureStore& store,
                                                  const std::vector<std::string>& ids);

struct CcaReport {
  std::string probe_point;
  int retained_a = 0;
  int retained_b = 0;
  std::vector<double> correlations;  // descending, each in [0, 1]
  double mean_correlation = 0.0;
};

// Center columns, SVD-truncate each side to the smallest rank holding at
// least variance_keep of the squared-singular-value mass, then report the
// canonical correlations between the truncated subspaces.
CcaReport svcca_similarity(const ActivationMatrix& a, const ActivationMatrix& b,
                           double variance_keep = 0.99);

void write_cca_report_json(const CcaReport& report, const fs::path& path);

struct SegmentScore {
  std::string segment;
  double mean_correlation = 0.0;
};

// SVCCA between two models of the same architecture at all six probe points,
// in forward order.
std::vector<SegmentScore> weights_change_curve(ModelHandle& before, ModelHandle& after,
                                               const FeatureStore& store,
                                               const std::vector<std::string>& ids,
                                               double variance_keep = 0.99);

enum class AblationKind { kFusion, kFreeze, kCutoff };

std::string ablation_kind_name(AblationKind k);
AblationKind ablation_kind_from_name(const std::string& s);

struct AblationCurve {
  AblationKind kind = AblationKind::kFusion;
  std::vector<std::string> cut_points;
  std::vector<double> val_accuracies;
  std::vector<std::string> run_ids;
  bool partial = false;  // set when a point diverged
};

// Valid cut points: FUSION/FREEZE stem..block4, CUTOFF block2..block4.
std::vector<std::string> ablation_cut_points(AblationKind kind);

// Builds each cut point's model (fuse / freeze / truncate), trains it, and
// records the validation accuracy. Every point's run is persisted.
AblationCurve run_ablation_suite(AblationKind kind, Architecture arch,
                                 const WeightArchive& pretrained, const FeatureStore& store,
                                 const FoldPlan& plan, const TrainConfig& cfg,
                                 const fs::path& runs_dir,
                                 const EpochCallback& on_epoch = nullptr);

void write_ablation_csv(const AblationCurve& curve, const fs::path& path);

// ---------------------------------------------------------------------------
// Integrated gradients
// ---------------------------------------------------------------------------

template <typename T>
struct AttributionMapT {
  nn::Tensor<T> values;    // same shape as the input
  nn::Tensor<T> baseline;
  int steps = 0;
  int target_class = 0;
  double completeness_residual = 0.0;
};
using AttributionMap = AttributionMapT<float>;

// Right-Riemann path integral of the target logit's input gradient from
// baseline to x; the completeness residual |sum(IG) - (F(x) - F(x'))| is
// recorded, never dropped.
template <typename T>
AttributionMapT<T> integrated_gradients(nn::Model<T>& model, const nn::Tensor<T>& x,
                                        const nn::Tensor<T>& baseline, int steps, int target) {
  if (x.shape != baseline.shape)
    throw DomainError("integrated_gradients: input and baseline shapes differ");
  if (steps < 1) throw DomainError("integrated_gradients: steps must be at least 1");
  AttributionMapT<T> map;
  map.baseline = baseline;
  map.steps = steps;
  map.target_class = target;
  map.values = nn::Tensor<T>(x.shape);

  nn::Tensor<T> diff(x.shape);
  kernels::vsub(x.numel(), x.v.data(), baseline.v.data(), diff.v.data());
  nn::Tensor<T> point(x.shape);
  nn::Tensor<T> grad_sum(x.shape);
  T f_end = T(0);
  for (int k = 1; k <= steps; ++k) {
    if (k == steps) {
      point = x;
    } else {
      T alpha = static_cast<T>(k) / static_cast<T>(steps);
      for (size_t i = 0; i < point.numel(); ++i)
        point.v[i] = baseline.v[i] + alpha * diff.v[i];
    }
    const nn::Tensor<T>& logits = model.forward(point, /*training=*/false);
    if (target < 0 || target >= logits.dim(1))
      throw DomainError("integrated_gradients: target class out of range");
    nn::Tensor<T> dlogits(logits.shape);
    dlogits.v[static_cast<size_t>(target)] = T(1);
    model.backward(dlogits);
    const nn::Tensor<T>& g = model.input_gradient();
    for (T v : g.v) {
      if (!std::isfinite(static_cast<double>(v)))
        throw NumericError("integrated_gradients: non-finite gradient at step " +
                           std::to_string(k));
    }
    kernels::axpy(grad_sum.numel(), T(1), g.v.data(), grad_sum.v.data());
    if (k == steps) f_end = logits.v[static_cast<size_t>(target)];
  }
  T inv_steps = T(1) / static_cast<T>(steps);
  for (size_t i = 0; i < map.values.numel(); ++i)
    map.values.v[i] = diff.v[i] * grad_sum.v[i] * inv_steps;

  const nn::Tensor<T>& base_logits = model.forward(baseline, /*training=*/false,
                                                   /*retain_activations=*/false);
  T f_base = base_logits.v[static_cast<size_t>(target)];
  double attr_sum = 0.0;
  for (T v : map.values.v) attr_sum += static_cast<double>(v);
  map.completeness_residual =
      std::abs(attr_sum - (static_cast<double>(f_end) - static_cast<double>(f_base)));
  return map;
}

// Per-channel minimum fill: "silence" in normalized log-mel space.
template <typename T>
nn::Tensor<T> min_baseline(const nn::Tensor<T>& x) {
  nn::Tensor<T> out(x.shape);
  const int c = x.dim(1);
  const size_t plane = x.numel() / static_cast<size_t>(c);
  for (int ch = 0; ch < c; ++ch) {
    const T* src = x.v.data() + static_cast<size_t>(ch) * plane;
    T mn = src[0];
    for (size_t i = 1; i < plane; ++i) mn = std::min(mn, src[i]);
    T* dst = out.v.data() + static_cast<size_t>(ch) * plane;
    std::fill(dst, dst + plane, mn);
  }
  return out;
}

// Side-by-side panel: channel-0 log-mel on the left, gamma-scaled
// |attribution| heat map on the right. Mel bin 0 renders at the bottom.
void render_attribution(const MelTensor& x, const AttributionMap& map, const fs::path& out_path);

void write_attribution_json(const AttributionMap& map, const fs::path& path);

}  // namespace auralab

#endif  // AURALAB_ANALYSIS_HPP_
