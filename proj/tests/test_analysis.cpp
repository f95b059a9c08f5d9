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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "auralab/analysis.hpp"
#include "testutil.hpp"

using namespace auralab;
using namespace testutil;

namespace {

ActivationMatrix random_activations(int n, int d, uint64_t seed, const std::string& probe = "x") {
  ActivationMatrix m;
  m.values = Mat(n, d);
  m.probe_point = probe;
  m.model_id = "test";
  Rng rng(seed);
  for (auto& v : m.values.a) v = rng.gaussian();
  return m;
}

// Closed-form CCA oracle: PCA-truncate via the covariance eigendecomposition,
// then read the squared canonical correlations off the whitened cross-
// covariance. Independent of the SVD route used by the implementation.
double cca_oracle_mean(const Mat& x_in, const Mat& y_in, double variance_keep) {
  Mat x = x_in, y = y_in;
  center_columns(x);
  center_columns(y);
  auto pca = [&](const Mat& m, Mat* projected) {
    Mat cov(m.cols, m.cols);
    for (int i = 0; i < m.cols; ++i)
      for (int j = 0; j < m.cols; ++j) {
        double acc = 0.0;
        for (int r = 0; r < m.rows; ++r) acc += m.at(r, i) * m.at(r, j);
        cov.at(i, j) = acc;
      }
    Mat vecs;
    std::vector<double> lam;
    sym_eig(cov, vecs, lam);
    double total = 0.0;
    for (double l : lam) total += std::max(0.0, l);
    int rank = 0;
    double acc = 0.0;
    for (double l : lam) {
      acc += std::max(0.0, l);
      ++rank;
      if (acc >= variance_keep * total) break;
    }
    while (rank > 0 && lam[rank - 1] <= 1e-24 * lam[0]) --rank;
    *projected = Mat(m.rows, rank);
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < rank; ++c) {
        double acc2 = 0.0;
        for (int k = 0; k < m.cols; ++k) acc2 += m.at(r, k) * vecs.at(k, c);
        projected->at(r, c) = acc2;
      }
    return lam;
  };
  Mat xr, yr;
  std::vector<double> lam_x = pca(x, &xr);
  std::vector<double> lam_y = pca(y, &yr);
  // Projected columns are orthogonal, so Sxx and Syy are diagonal.
  std::vector<double> dx(xr.cols), dy(yr.cols);
  for (int c = 0; c < xr.cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < xr.rows; ++r) acc += xr.at(r, c) * xr.at(r, c);
    dx[c] = acc;
  }
  for (int c = 0; c < yr.cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < yr.rows; ++r) acc += yr.at(r, c) * yr.at(r, c);
    dy[c] = acc;
  }
  Mat sxy(xr.cols, yr.cols);
  for (int i = 0; i < xr.cols; ++i)
    for (int j = 0; j < yr.cols; ++j) {
      double acc = 0.0;
      for (int r = 0; r < xr.rows; ++r) acc += xr.at(r, i) * yr.at(r, j);
      sxy.at(i, j) = acc;
    }
  // M = Dx^-1/2 Sxy Dy^-1 Syx Dx^-1/2; eigenvalues are rho^2.
  Mat m_mat(xr.cols, xr.cols);
  for (int i = 0; i < xr.cols; ++i)
    for (int j = 0; j < xr.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < yr.cols; ++k) acc += sxy.at(i, k) * sxy.at(j, k) / dy[k];
      m_mat.at(i, j) = acc / std::sqrt(dx[i] * dx[j]);
    }
  Mat vecs;
  std::vector<double> rho2;
  sym_eig(m_mat, vecs, rho2);
  int count = std::min(xr.cols, yr.cols);
  double mean = 0.0;
  for (int i = 0; i < count; ++i)
    mean += std::sqrt(std::clamp(rho2[i], 0.0, 1.0));
  return mean / count;
}

}  // namespace

TEST_CASE("svcca self-similarity is one") {
  ActivationMatrix a = random_activations(200, 12, 1);
  CcaReport r = svcca_similarity(a, a, 0.99);
  CHECK(r.mean_correlation == doctest::Approx(1.0).epsilon(1e-6));
  for (double c : r.correlations) CHECK(c == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("svcca is invariant under invertible linear maps") {
  ActivationMatrix a = random_activations(300, 8, 2);
  ActivationMatrix b = a;
  // Apply a well-conditioned invertible map on the right.
  Rng rng(3);
  Mat r_map(8, 8);
  for (int i = 0; i < 8; ++i) r_map.at(i, i) = 2.0 + rng.uniform();
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if (i != j) r_map.at(i, j) = 0.3 * rng.gaussian();
  b.values = matmul(a.values, r_map);
  CcaReport rep = svcca_similarity(a, b, 1.0);
  CHECK(rep.mean_correlation == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("independent gaussians decorrelate and match the closed-form oracle") {
  ActivationMatrix a = random_activations(1000, 10, 4);
  ActivationMatrix b = random_activations(1000, 10, 5);
  for (double keep : {1.0, 0.99}) {
    CcaReport r = svcca_similarity(a, b, keep);
    CHECK(r.mean_correlation < 0.2);
    double oracle = cca_oracle_mean(a.values, b.values, keep);
    CHECK(std::abs(r.mean_correlation - oracle) <= 1e-6);
  }
}

TEST_CASE("svcca is symmetric and bounded") {
  ActivationMatrix a = random_activations(150, 6, 6);
  ActivationMatrix b = random_activations(150, 9, 7);
  CcaReport ab = svcca_similarity(a, b, 0.99);
  CcaReport ba = svcca_similarity(b, a, 0.99);
  CHECK(std::abs(ab.mean_correlation - ba.mean_correlation) <= 1e-6);
  for (double c : ab.correlations) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0 + 1e-8);
  }
  CHECK(std::is_sorted(ab.correlations.rbegin(), ab.correlations.rend()));
}

TEST_CASE("svcca rejects degenerate and misaligned inputs") {
  ActivationMatrix a = random_activations(50, 4, 8);
  ActivationMatrix zero = a;
  std::fill(zero.values.a.begin(), zero.values.a.end(), 0.0);
  CHECK_THROWS_WITH_AS(svcca_similarity(a, zero, 0.99),
                       doctest::Contains("degenerate"), DomainError);
  ActivationMatrix short_rows = random_activations(40, 4, 9);
  CHECK_THROWS_AS(svcca_similarity(a, short_rows, 0.99), DomainError);
  CHECK_THROWS_AS(svcca_similarity(a, a, 0.0), DomainError);
  CHECK_THROWS_AS(svcca_similarity(a, a, 1.5), DomainError);
}

TEST_CASE("truncation keeps the dominant subspace") {
  // Rank-2 signal plus faint noise: 0.99 mass keeps roughly the signal rank.
  Rng rng(10);
  Mat base(400, 2);
  for (auto& v : base.a) v = rng.gaussian();
  ActivationMatrix a;
  a.probe_point = "x";
  a.values = Mat(400, 6);
  for (int r = 0; r < 400; ++r)
    for (int c = 0; c < 6; ++c)
      a.values.at(r, c) = base.at(r, c % 2) * (c < 2 ? 2.0 : 1.0) + 1e-4 * rng.gaussian();
  CcaReport rep = svcca_similarity(a, a, 0.99);
  CHECK(rep.retained_a <= 3);
  CHECK(rep.mean_correlation == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("capture_activations yields row-aligned channel means") {
  ToneFixture f = make_tone_fixture("cap_fix", 2, 6);
  FoldPlan plan = split_folds(f.manifest, 1);
  ModelHandle m = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 3);
  auto mats = capture_activations(m, {"block1", "block4", "classifier"}, f.store, plan.val_ids);
  REQUIRE(mats.size() == 3);
  CHECK(mats[0].values.rows == static_cast<int>(plan.val_ids.size()));
  CHECK(mats[0].values.cols == 16);   // block1 channels
  CHECK(mats[1].values.cols == 128);  // block4 channels
  CHECK(mats[2].values.cols == 2);    // logits
  auto again = capture_activations(m, {"block1"}, f.store, plan.val_ids);
  CHECK(again[0].values.a == mats[0].values.a);  // deterministic
  CHECK_THROWS_AS(capture_activations(m, {"blockx"}, f.store, plan.val_ids), DomainError);
}

TEST_CASE("weights change curve: identity models score one everywhere") {
  ToneFixture f = make_tone_fixture("wc_fix", 2, 10);
  FoldPlan plan = split_folds(f.manifest, 1);
  ModelHandle before = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 4);
  ModelHandle after = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 4);
  auto curve = weights_change_curve(before, after, f.store, plan.val_ids, 0.99);
  REQUIRE(curve.size() == 6);
  CHECK(curve[0].segment == "stem");
  CHECK(curve[5].segment == "classifier");
  for (const auto& point : curve)
    CHECK(point.mean_correlation == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fine-tuned weights stay closer to the start than a random re-init") {
  ToneFixture f = make_tone_fixture("wc_train", 2, 50);
  FoldPlan plan = split_folds(f.manifest, 1);
  WeightArchive archive;
  {
    ModelHandle source = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 70);
    archive = archive_from_model(source.net(), "wc-pretrained");
  }
  ModelHandle before = build_backbone(Architecture::kTiny, InitMode::kPretrained, 2, 71, &archive);
  ModelHandle tuned = build_backbone(Architecture::kTiny, InitMode::kPretrained, 2, 71, &archive);
  TrainConfig cfg = default_train_config(Regime::kPretrained70);
  cfg.epochs = 3;
  cfg.lr_drop_epochs = {};
  cfg.base_lr = 1e-3;
  cfg.batch_size = 8;
  cfg.seed = 72;
  train_model(tuned, f.store, plan, cfg);
  ModelHandle random_after = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 73);

  // Probe on every clip: SVCCA needs decisively more rows than neurons.
  std::vector<std::string> ids = plan.train_ids;
  ids.insert(ids.end(), plan.val_ids.begin(), plan.val_ids.end());
  std::sort(ids.begin(), ids.end());
  auto tuned_curve = weights_change_curve(before, tuned, f.store, ids, 0.99);
  auto random_curve = weights_change_curve(before, random_after, f.store, ids, 0.99);
  for (size_t i = 0; i < tuned_curve.size(); ++i) {
    INFO("segment ", tuned_curve[i].segment, " tuned=", tuned_curve[i].mean_correlation,
         " random=", random_curve[i].mean_correlation);
    CHECK(random_curve[i].mean_correlation < tuned_curve[i].mean_correlation);
  }
}

TEST_CASE("svcca rejects more neurons than samples") {
  ActivationMatrix wide = random_activations(50, 60, 40);
  CHECK_THROWS_WITH_AS(svcca_similarity(wide, wide, 0.99),
                       doctest::Contains("insufficient samples"), DomainError);
}

TEST_CASE("ablation suites construct, train, and persist every cut point") {
  ToneFixture f = make_tone_fixture("abl_fix", 2, 6);
  FoldPlan plan = split_folds(f.manifest, 1);
  WeightArchive archive;
  {
    ModelHandle source = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 80);
    archive = archive_from_model(source.net(), "abl-pretrained");
  }
  TrainConfig cfg = default_train_config(Regime::kPretrained70);
  cfg.epochs = 1;
  cfg.lr_drop_epochs = {};
  cfg.batch_size = 8;
  cfg.seed = 81;
  fs::path runs = fresh_dir("abl_runs");

  SUBCASE("fusion curve hits all five cut points; block4 equals plain pretrained") {
    AblationCurve curve = run_ablation_suite(AblationKind::kFusion, Architecture::kTiny, archive,
                                             f.store, plan, cfg, runs);
    CHECK(curve.cut_points ==
          std::vector<std::string>{"stem", "block1", "block2", "block3", "block4"});
    CHECK(!curve.partial);
    for (const auto& id : curve.run_ids) CHECK(fs::exists(runs / id / "record.json"));

    ModelHandle plain = build_backbone(Architecture::kTiny, InitMode::kPretrained, 2, cfg.seed,
                                       &archive);
    RunRecord rec = train_model(plain, f.store, plan, cfg);
    CHECK(curve.val_accuracies.back() == rec.final_val_accuracy);  // identical construction

    fs::path csv = fresh_dir("abl_csv") / "fusion.csv";
    write_ablation_csv(curve, csv);
    std::string text = read_text_file(csv);
    CHECK(text.find("cut_point,val_accuracy,run_id") == 0);
    CHECK(text.find("block4") != std::string::npos);
  }

  SUBCASE("freeze curve keeps frozen checksums for every cut point") {
    for (const std::string& cut : ablation_cut_points(AblationKind::kFreeze)) {
      ModelHandle m = build_backbone(Architecture::kTiny, InitMode::kPretrained, 2, cfg.seed,
                                     &archive);
      set_trainable(m, cut);
      std::vector<std::pair<std::string, uint64_t>> frozen;
      for (const std::string& seg : m.net().segments()) {
        if (m.net().segment_frozen(seg)) frozen.push_back({seg, segment_checksum(m, seg)});
      }
      train_model(m, f.store, plan, cfg);
      for (const auto& [seg, sum] : frozen) CHECK(segment_checksum(m, seg) == sum);
    }
  }

  SUBCASE("cutoff curve trains truncated models end to end") {
    AblationCurve curve = run_ablation_suite(AblationKind::kCutoff, Architecture::kTiny, archive,
                                             f.store, plan, cfg, runs);
    CHECK(curve.cut_points == std::vector<std::string>{"block2", "block3", "block4"});
    CHECK(!curve.partial);
    for (double acc : curve.val_accuracies) {
      CHECK(acc >= 0.0);
      CHECK(acc <= 1.0);
    }

    // Every curve point is reproducible from its persisted checkpoint.
    for (size_t i = 0; i < curve.run_ids.size(); ++i) {
      fs::path run_dir = runs / curve.run_ids[i];
      RunRecord rec = load_run_record(run_dir);
      WeightArchive ckpt = load_archive(run_dir / rec.checkpoint_dir);
      ModelHandle full = build_backbone(Architecture::kTiny, InitMode::kPretrained, 2, cfg.seed,
                                        &archive);
      ModelHandle reloaded = truncate_after(full, curve.cut_points[i], 2, cfg.seed);
      load_into_model(ckpt, reloaded.net(), [](const std::string&) { return true; });
      Metrics again = evaluate_model(reloaded, f.store, plan.val_ids);
      CHECK(again.accuracy == curve.val_accuracies[i]);
    }
  }
}

// ---------------------------------------------------------------------------
// integrated gradients
// ---------------------------------------------------------------------------

namespace {

// Bare linear scorer F(x) = W x over a flat input.
template <typename T>
nn::Model<T> linear_scorer(const std::vector<T>& weights, int in_dim, int classes) {
  nn::Model<T> model;
  model.set_segments({"classifier"});
  auto lin = std::make_unique<nn::Linear<T>>(in_dim, classes);
  lin->weight_.value.v = weights;
  int node = model.add("classifier.fc", "classifier", std::move(lin), {0});
  model.set_segment_output("classifier", node);
  return model;
}

}  // namespace

TEST_CASE("integrated gradients are exact for a linear scorer") {
  const int d = 6;
  std::vector<float> w = {0.5f, -1.0f, 2.0f, 0.0f, 0.25f, -0.75f,
                          0.1f, 0.2f,  0.3f, 0.4f, 0.5f,  0.6f};
  nn::Model<float> model = linear_scorer(w, d, 2);
  nn::Tensor<float> x({1, d});
  x.v = {1.0f, 2.0f, -1.0f, 3.0f, 0.5f, -2.0f};
  nn::Tensor<float> baseline({1, d});
  for (int steps : {1, 3, 17}) {
    AttributionMap map = integrated_gradients(model, x, baseline, steps, 0);
    for (int i = 0; i < d; ++i)
      CHECK(map.values.v[i] == doctest::Approx(w[i] * x.v[i]).epsilon(1e-6));
    CHECK(map.completeness_residual <= 1e-5);
  }
}

TEST_CASE("x equal to baseline attributes nothing") {
  nn::Model<double> model;
  build_tiny_backbone(model, 2);
  Rng rng(14);
  init_params(model, rng);
  nn::Tensor<double> x({1, 3, 64, 32});
  for (auto& v : x.v) v = rng.gaussian();
  AttributionMapT<double> map = integrated_gradients(model, x, x, 25, 1);
  for (double v : map.values.v) CHECK(v == 0.0);
  CHECK(map.completeness_residual <= 1e-12);
}

TEST_CASE("completeness residual is small and shrinks as steps double") {
  nn::Model<double> model;
  build_tiny_backbone(model, 3);
  Rng rng(15);
  init_params(model, rng);
  nn::Tensor<double> x({1, 3, 64, 32});
  for (auto& v : x.v) v = rng.gaussian() * 0.7;
  nn::Tensor<double> baseline = min_baseline(x);

  const auto& fx = model.forward(x, false, false);
  double f_x = fx.v[2];
  const auto& fb = model.forward(baseline, false, false);
  double f_b = fb.v[2];
  double gap = std::abs(f_x - f_b);

  double prev = 1e300;
  for (int steps : {25, 50, 100, 200}) {
    AttributionMapT<double> map = integrated_gradients(model, x, baseline, steps, 2);
    CHECK(map.completeness_residual <= prev + 1e-7);  // monotone within the noise floor
    prev = map.completeness_residual;
  }
  AttributionMapT<double> final_map = integrated_gradients(model, x, baseline, 200, 2);
  CHECK(final_map.completeness_residual <= 0.01 * gap + 1e-6);
}

TEST_CASE("scaling the logits scales every attribution") {
  nn::Model<double> a;
  build_tiny_backbone(a, 2);
  Rng rng(16);
  init_params(a, rng);
  nn::Model<double> b;
  build_tiny_backbone(b, 2);
  Rng rng2(16);
  init_params(b, rng2);
  const double c = 3.5;
  for (nn::Param<double>* p : b.segment_params("classifier"))
    for (auto& v : p->value.v) v *= c;

  nn::Tensor<double> x({1, 3, 64, 32});
  for (auto& v : x.v) v = rng.gaussian() * 0.4;
  nn::Tensor<double> baseline = min_baseline(x);
  auto ma = integrated_gradients(a, x, baseline, 40, 0);
  auto mb = integrated_gradients(b, x, baseline, 40, 0);
  for (size_t i = 0; i < ma.values.numel(); ++i)
    CHECK(mb.values.v[i] == doctest::Approx(c * ma.values.v[i]).epsilon(1e-6));
}

TEST_CASE("integrated gradients validate their inputs") {
  nn::Model<float> model = linear_scorer<float>({1.0f, 1.0f}, 2, 1);
  nn::Tensor<float> x({1, 2});
  nn::Tensor<float> wrong({1, 3});
  CHECK_THROWS_AS(integrated_gradients(model, x, wrong, 5, 0), DomainError);
  CHECK_THROWS_AS(integrated_gradients(model, x, x, 0, 0), DomainError);
  CHECK_THROWS_AS(integrated_gradients(model, x, x, 5, 9), DomainError);
}

namespace {

// Tone burst corpus: energy only in the middle third of each clip.
fs::path make_burst_tree(const std::string& name) {
  fs::path root = fresh_dir(name);
  const int sr = 22050;
  const size_t n = sr;  // 1 s
  for (int cls = 0; cls < 2; ++cls) {
    fs::path dir = root / ("burst" + std::to_string(cls));
    fs::create_directories(dir);
    double hz = cls == 0 ? 400.0 : 1400.0;
    for (int i = 0; i < 6; ++i) {
      std::vector<float> x(n, 0.0f);
      for (size_t t = n / 3; t < 2 * n / 3; ++t)
        x[t] = 0.6f * static_cast<float>(std::sin(6.283185307179586 * hz * (t + 37 * i) / sr));
      char file[64];
      std::snprintf(file, sizeof(file), "burst%d.%05d.wav", cls, i);
      write_wav(dir / file, x, 1, sr);
    }
  }
  return root;
}

}  // namespace

TEST_CASE("attribution heat overlaps the burst's time-frequency region") {
  fs::path data = make_burst_tree("ig_burst");
  DatasetManifest m = build_manifest(DatasetKind::kTones, data);
  fs::path store_dir = fresh_dir("ig_burst_store");
  FeatureStore store = cache_features(m, dsp_config_for(DatasetKind::kTones), std::nullopt,
                                      store_dir);
  FoldPlan plan = split_folds(m, 1);
  ModelHandle model = build_backbone(Architecture::kTiny, InitMode::kRandom, 2, 21);
  TrainConfig cfg = default_train_config(Regime::kPretrained70);
  cfg.epochs = 2;
  cfg.lr_drop_epochs = {};
  cfg.base_lr = 1e-3;
  cfg.batch_size = 8;
  cfg.seed = 22;
  train_model(model, store, plan, cfg);

  const std::string clip = plan.val_ids.front();
  MelTensor mel = load_record(store, clip);
  nn::Tensor<float> x({1, 3, mel.n_mels, mel.width});
  std::copy(mel.values.begin(), mel.values.end(), x.v.begin());
  int target = store.records.at(clip).label;
  AttributionMap map = integrated_gradients(model.net(), x, min_baseline(x), 50, target);

  // Balanced-size IoU between the top attribution cells and the top energy
  // cells of channel 0.
  const size_t plane = static_cast<size_t>(mel.n_mels) * mel.width;
  std::vector<size_t> order_energy(plane), order_attr(plane);
  for (size_t i = 0; i < plane; ++i) order_energy[i] = order_attr[i] = i;
  const float* energy = x.v.data();          // channel 0
  const float* attr = map.values.v.data();   // channel 0
  std::sort(order_energy.begin(), order_energy.end(),
            [&](size_t a, size_t b) { return energy[a] > energy[b]; });
  std::sort(order_attr.begin(), order_attr.end(), [&](size_t a, size_t b) {
    return std::abs(attr[a]) > std::abs(attr[b]);
  });
  const size_t k = plane / 10;
  std::set<size_t> top_energy(order_energy.begin(), order_energy.begin() + k);
  size_t inter = 0;
  for (size_t i = 0; i < k; ++i) inter += top_energy.count(order_attr[i]);
  double iou = static_cast<double>(inter) / static_cast<double>(2 * k - inter);
  INFO("IoU = ", iou);
  CHECK(iou > 0.2);

  SUBCASE("render writes a two-panel png") {
    fs::path png = fresh_dir("ig_render") / "attr.png";
    render_attribution(mel, map, png);
    Image img = read_png(png);
    CHECK(img.width == mel.width * 2 + 2);
    CHECK(img.height == mel.n_mels);
  }
}

TEST_CASE("zero attribution renders a uniform second panel") {
  Waveform w;
  w.sample_rate = 22050;
  w.samples = tone_samples(440.0, 1.0, 22050, 1);
  MelTensor mel = multires_melspec(w, canonical_window_specs(), 64);
  AttributionMap map;
  map.values = nn::Tensor<float>({1, 3, mel.n_mels, mel.width});
  fs::path png = fresh_dir("ig_zero") / "zero.png";
  render_attribution(mel, map, png);
  Image img = read_png(png);
  Rgb first = img.get(mel.width + 2, 0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = mel.width + 2; x < img.width; ++x) {
      Rgb p = img.get(x, y);
      REQUIRE(p.r == first.r);
      REQUIRE(p.g == first.g);
      REQUIRE(p.b == first.b);
    }
  }
}

TEST_CASE("cca report json carries the contract fields") {
  ActivationMatrix a = random_activations(100, 5, 30, "block2");
  CcaReport r = svcca_similarity(a, a, 0.99);
  fs::path p = fresh_dir("cca_json") / "report.json";
  write_cca_report_json(r, p);
  std::string text = read_text_file(p);
  for (const char* key : {"probe_point", "retained_components", "correlations",
                          "mean_correlation"}) {
    CHECK(text.find(key) != std::string::npos);
  }
}
