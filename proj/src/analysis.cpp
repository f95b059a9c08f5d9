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

#include "auralab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace auralab {

using nlohmann::json;

std::vector<ActivationMatrix> capture_activations(ModelHandle& m,
                                                  const std::vector<std::string>& probe_points,
                                                  const FeatureStore& store,
                                                  const std::vector<std::string>& ids) {
  if (ids.empty()) throw DomainError("capture_activations: empty id list");
  const auto& outputs = m.net().segment_outputs();
  for (const std::string& p : probe_points) {
    if (!outputs.count(p)) throw DomainError("unknown probe point '" + p + "'");
  }
  std::vector<ActivationMatrix> mats(probe_points.size());
  constexpr size_t kBatch = 16;
  size_t row = 0;
  for (size_t begin = 0; begin < ids.size(); begin += kBatch) {
    size_t end = std::min(ids.size(), begin + kBatch);
    nn::Tensor<float> batch;
    for (size_t i = begin; i < end; ++i) {
      MelTensor t = load_record(store, ids[i]);
      if (batch.empty())
        batch = nn::Tensor<float>({static_cast<int>(end - begin), MelTensor::kChannels, t.n_mels,
                                   t.width});
      std::copy(t.values.begin(), t.values.end(),
                batch.v.begin() + static_cast<long>((i - begin) * t.values.size()));
    }
    m.net().forward(batch, /*training=*/false, /*retain_activations=*/false);
    for (size_t pi = 0; pi < probe_points.size(); ++pi) {
      const nn::Tensor<float>& act = m.net().activation(outputs.at(probe_points[pi]));
      const int n = act.dim(0);
      const int d = act.dim(1);
      const size_t plane = act.shape.size() == 4
                               ? static_cast<size_t>(act.dim(2)) * act.dim(3)
                               : 1;
      if (mats[pi].values.rows == 0) {
        mats[pi].values = Mat(static_cast<int>(ids.size()), d);
        mats[pi].probe_point = probe_points[pi];
        mats[pi].model_id = architecture_name(m.architecture) + ":" + std::to_string(m.seed);
      }
      for (int s = 0; s < n; ++s) {
        for (int ch = 0; ch < d; ++ch) {
          const float* src = act.v.data() + (static_cast<size_t>(s) * d + ch) * plane;
          double acc = 0.0;
          for (size_t i = 0; i < plane; ++i) acc += src[i];
          mats[pi].values.at(static_cast<int>(row) + s, ch) = acc / static_cast<double>(plane);
        }
      }
    }
    row += end - begin;
  }
  return mats;
}

namespace {

// Centered-and-truncated representation: the left singular basis scaled by
// its singular values, cut at the requested squared-mass fraction.
struct TruncatedSide {
  Mat basis;  // N x rank, orthonormal columns
  int rank = 0;
};

TruncatedSide truncate_side(const Mat& centered, double variance_keep, const std::string& side) {
  Mat u, v;
  std::vector<double> s;
  svd(centered, u, s, v);
  double total = 0.0;
  for (double x : s) total += x * x;
  if (total <= 0.0)
    throw DomainError("svcca: degenerate input, " + side + " side has rank 0");
  int rank = 0;
  double acc = 0.0;
  for (double x : s) {
    if (acc >= variance_keep * total && rank > 0) break;
    acc += x * x;
    ++rank;
    if (acc >= variance_keep * total) break;
  }
  // Drop numerically-zero directions even when variance_keep is 1.
  while (rank > 0 && s[static_cast<size_t>(rank) - 1] <= 1e-12 * s[0]) --rank;
  if (rank == 0) throw DomainError("svcca: degenerate input, " + side + " side has rank 0");
  TruncatedSide out;
  out.rank = rank;
  out.basis = Mat(u.rows, rank);
  for (int r = 0; r < u.rows; ++r)
    for (int c = 0; c < rank; ++c) out.basis.at(r, c) = u.at(r, c);
  return out;
}

}  // namespace

CcaReport svcca_similarity(const ActivationMatrix& a, const ActivationMatrix& b,
                           double variance_keep) {
  if (a.values.rows != b.values.rows)
    throw DomainError("svcca: activation matrices must have the same number of rows");
  if (a.values.rows < 2) throw DomainError("svcca: need at least 2 rows");
  if (variance_keep <= 0.0 || variance_keep > 1.0)
    throw DomainError("svcca: variance_keep must be in (0, 1]");
  for (double v : a.values.a)
    if (!std::isfinite(v)) throw NumericError("svcca: non-finite activation value");
  for (double v : b.values.a)
    if (!std::isfinite(v)) throw NumericError("svcca: non-finite activation value");

  // Correlations between near-full-rank subspaces of a small sample are
  // spuriously 1; demand more examples than neurons on both sides.
  if (a.values.rows <= std::max(a.values.cols, b.values.cols))
    throw DomainError("svcca: insufficient samples: " + std::to_string(a.values.rows) +
                      " rows for " + std::to_string(std::max(a.values.cols, b.values.cols)) +
                      " neurons; subsample neurons or add examples");
  Mat ca = a.values, cb = b.values;
  center_columns(ca);
  center_columns(cb);
  TruncatedSide ta = truncate_side(ca, variance_keep, "first");
  TruncatedSide tb = truncate_side(cb, variance_keep, "second");
  if (a.values.rows <= std::max(ta.rank, tb.rank))
    throw DomainError("svcca: insufficient samples: " + std::to_string(a.values.rows) +
                      " rows for retained rank " + std::to_string(std::max(ta.rank, tb.rank)));

  // Canonical correlations of two orthonormal bases are the singular values
  // of their cross-product.
  Mat cross(ta.rank, tb.rank);
  kernels::gemm_tn(ta.rank, tb.rank, ta.basis.rows, ta.basis.a.data(), tb.basis.a.data(),
                   cross.a.data(), false);
  Mat u, v;
  std::vector<double> s;
  svd(cross, u, s, v);

  CcaReport report;
  report.probe_point = a.probe_point;
  report.retained_a = ta.rank;
  report.retained_b = tb.rank;
  double sum = 0.0;
  for (double x : s) {
    double clipped = std::clamp(x, 0.0, 1.0);
    report.correlations.push_back(clipped);
    sum += clipped;
  }
  report.mean_correlation = report.correlations.empty() ? 0.0 : sum / report.correlations.size();
  return report;
}

void write_cca_report_json(const CcaReport& report, const fs::path& path) {
  json j;
  j["probe_point"] = report.probe_point;
  j["retained_components"] = {{"a", report.retained_a}, {"b", report.retained_b}};
  j["correlations"] = report.correlations;
  j["mean_correlation"] = report.mean_correlation;
  write_text_file(path, j.dump(2) + "\n");
}

namespace {

// Wide layers can carry more neurons than CCA can support at the probe
// sample count; keep an evenly spaced subset (the same subset on both sides,
// so rows stay comparable) of at most N/4 neurons. Near-full-rank subspaces
// of a small sample would otherwise correlate spuriously.
void subsample_columns_for_cca(ActivationMatrix& a, ActivationMatrix& b) {
  int n = a.values.rows;
  int d = a.values.cols;
  if (d <= n / 4) return;
  int keep = std::max(1, n / 4);
  if (keep >= d) return;
  Mat sa(n, keep), sb(n, keep);
  for (int c = 0; c < keep; ++c) {
    int src = static_cast<int>((static_cast<long>(c) * d) / keep);
    for (int r = 0; r < n; ++r) {
      sa.at(r, c) = a.values.at(r, src);
      sb.at(r, c) = b.values.at(r, src);
    }
  }
  a.values = std::move(sa);
  b.values = std::move(sb);
}

}  // namespace

std::vector<SegmentScore> weights_change_curve(ModelHandle& before, ModelHandle& after,
                                               const FeatureStore& store,
                                               const std::vector<std::string>& ids,
                                               double variance_keep) {
  if (before.architecture != after.architecture)
    throw DomainError("weights_change_curve: models must share an architecture");
  std::vector<std::string> probes = before.net().segments();
  std::vector<ActivationMatrix> acts_before = capture_activations(before, probes, store, ids);
  std::vector<ActivationMatrix> acts_after = capture_activations(after, probes, store, ids);
  std::vector<SegmentScore> curve;
  for (size_t i = 0; i < probes.size(); ++i) {
    subsample_columns_for_cca(acts_before[i], acts_after[i]);
    CcaReport r = svcca_similarity(acts_before[i], acts_after[i], variance_keep);
    curve.push_back({probes[i], r.mean_correlation});
  }
  return curve;
}

std::string ablation_kind_name(AblationKind k) {
  switch (k) {
    case AblationKind::kFusion: return "fusion";
    case AblationKind::kFreeze: return "freeze";
    case AblationKind::kCutoff: return "cutoff";
  }
  return "unknown";
}

AblationKind ablation_kind_from_name(const std::string& s) {
  if (s == "fusion") return AblationKind::kFusion;
  if (s == "freeze") return AblationKind::kFreeze;
  if (s == "cutoff") return AblationKind::kCutoff;
  throw ConfigError("unknown ablation kind '" + s + "' (want fusion, freeze, or cutoff)");
}

std::vector<std::string> ablation_cut_points(AblationKind kind) {
  if (kind == AblationKind::kCutoff) return {"block2", "block3", "block4"};
  return {"stem", "block1", "block2", "block3", "block4"};
}

AblationCurve run_ablation_suite(AblationKind kind, Architecture arch,
                                 const WeightArchive& pretrained, const FeatureStore& store,
                                 const FoldPlan& plan, const TrainConfig& cfg,
                                 const fs::path& runs_dir, const EpochCallback& on_epoch) {
  AblationCurve curve;
  curve.kind = kind;
  const int num_classes = store_num_classes(store);
  for (const std::string& cut : ablation_cut_points(kind)) {
    ModelHandle model = [&] {
      switch (kind) {
        case AblationKind::kFusion:
          return fuse_weights(pretrained, cut, arch, num_classes, cfg.seed);
        case AblationKind::kFreeze: {
          ModelHandle m = build_backbone(arch, InitMode::kPretrained, num_classes,
                                         cfg.seed, &pretrained);
          set_trainable(m, cut);
          return m;
        }
        case AblationKind::kCutoff: {
          ModelHandle full = build_backbone(arch, InitMode::kPretrained, num_classes,
                                            cfg.seed, &pretrained);
          return truncate_after(full, cut, num_classes, cfg.seed);
        }
      }
      throw DomainError("unknown ablation kind");
    }();
    std::string run_id = dataset_kind_name(store.kind) + "-" + architecture_name(arch) + "-" +
                         ablation_kind_name(kind) + "-" + cut;
    curve.cut_points.push_back(cut);
    curve.run_ids.push_back(run_id);
    try {
      RunRecord rec = train_model(model, store, plan, cfg, on_epoch);
      rec.run_id = run_id;
      persist_run(rec, model, runs_dir / run_id);
      curve.val_accuracies.push_back(rec.final_val_accuracy);
    } catch (const NumericError&) {
      curve.val_accuracies.push_back(std::numeric_limits<double>::quiet_NaN());
      curve.partial = true;
    }
  }
  return curve;
}

void write_ablation_csv(const AblationCurve& curve, const fs::path& path) {
  std::ostringstream csv;
  csv << "cut_point,val_accuracy,run_id\n";
  for (size_t i = 0; i < curve.cut_points.size(); ++i) {
    csv << curve.cut_points[i] << "," << curve.val_accuracies[i] << "," << curve.run_ids[i]
        << "\n";
  }
  write_text_file(path, csv.str());
}

void render_attribution(const MelTensor& x, const AttributionMap& map, const fs::path& out_path) {
  if (map.values.shape != std::vector<int>{1, MelTensor::kChannels, x.n_mels, x.width} &&
      map.values.shape != std::vector<int>{MelTensor::kChannels, x.n_mels, x.width})
    throw DomainError("render_attribution: attribution shape does not match the input tensor");
  const int h = x.n_mels, w = x.width;
  const int gap = 2;
  Image img(w * 2 + gap, h, {255, 255, 255});

  float lo = x.at(0, 0, 0), hi = lo;
  for (int m = 0; m < h; ++m)
    for (int t = 0; t < w; ++t) {
      lo = std::min(lo, x.at(0, m, t));
      hi = std::max(hi, x.at(0, m, t));
    }
  float range = hi > lo ? hi - lo : 1.0f;
  const float* attr = map.values.v.data();  // channel 0 slice
  double attr_max = 0.0;
  for (int i = 0; i < h * w; ++i) attr_max = std::max(attr_max, std::abs(static_cast<double>(attr[i])));
  constexpr double kGamma = 0.5;
  for (int m = 0; m < h; ++m) {
    int y = h - 1 - m;  // low mel bins at the bottom
    for (int t = 0; t < w; ++t) {
      img.set(t, y, colormap((x.at(0, m, t) - lo) / range));
      double a = attr_max > 0.0
                     ? std::pow(std::abs(static_cast<double>(attr[m * w + t])) / attr_max, kGamma)
                     : 0.0;
      img.set(w + gap + t, y, colormap(a));
    }
  }
  write_png(img, out_path);
}

void write_attribution_json(const AttributionMap& map, const fs::path& path) {
  json j;
  j["steps"] = map.steps;
  j["target_class"] = map.target_class;
  j["completeness_residual"] = map.completeness_residual;
  j["shape"] = map.values.shape;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace auralab
