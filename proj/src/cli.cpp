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

#include "auralab/cli.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "auralab/analysis.hpp"
#include "auralab/config.hpp"
#include "auralab/ensemble.hpp"
#include "auralab/report.hpp"

namespace auralab {

namespace {

// Progress goes to stderr; stdout stays machine-readable.
void note(const std::string& msg) { std::cerr << msg << "\n"; }

EpochCallback epoch_logger(const std::string& tag) {
  return [tag](const EpochLog& e) {
    std::cerr << tag << " epoch " << e.epoch << " lr " << e.lr << " train_loss " << e.train_loss
              << " train_acc " << e.train_accuracy << " val_acc " << e.val_accuracy << "\n";
  };
}

void echo_config(const ExperimentConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_text_file(dir / "config.toml", cfg.to_toml());
}

fs::path resolve_dataset_root(const ExperimentConfig& cfg) {
  if (!cfg.dataset_root.empty()) return cfg.dataset_root;
  if (const char* env = std::getenv("AURALAB_DATA_ROOT"))
    return fs::path(env) / dataset_kind_name(cfg.dataset);
  throw ConfigError("no dataset root: set dataset.root or AURALAB_DATA_ROOT");
}

WeightArchive require_archive(const ExperimentConfig& cfg) {
  if (cfg.pretrained_archive.empty())
    throw ConfigError("model.pretrained_archive is required for pretrained initialization");
  return load_archive(cfg.pretrained_archive);
}

std::string single_run_id(const ExperimentConfig& cfg) {
  std::string fold_part = dataset_profile(cfg.dataset).official_folds > 0
                              ? "fold" + std::to_string(cfg.fold)
                              : "seed" + std::to_string(cfg.split_seed);
  return dataset_kind_name(cfg.dataset) + "-" + architecture_name(cfg.architecture) + "-" +
         init_mode_name(cfg.init) + "-" + fold_part + "-s" + std::to_string(cfg.root_seed);
}

FoldPlan plan_for(const ExperimentConfig& cfg, const FeatureStore& store) {
  return dataset_profile(cfg.dataset).official_folds > 0
             ? store_fold_plan(store, cfg.fold)
             : store_fold_plan_seeded(store, cfg.split_seed);
}

int cmd_prep(const ExperimentConfig& cfg) {
  DirLock lock(cfg.out_dir);
  DatasetManifest manifest = build_manifest(cfg.dataset, resolve_dataset_root(cfg));
  DspConfig dsp = dsp_config_for(cfg.dataset);
  dsp.scale = cfg.mel_scale;
  std::optional<AugmentationPolicy> aug;
  if (cfg.augment) aug = cfg.augmentation;
  CacheStats stats;
  FeatureStore store = cache_features(manifest, dsp, aug, cfg.features_dir(), &stats);
  echo_config(cfg, cfg.features_dir());
  note("prep: " + std::to_string(store.records.size()) + " records (" +
       std::to_string(stats.written) + " written, " + std::to_string(stats.verified) +
       " verified) in " + cfg.features_dir().string());
  return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
  DirLock lock(cfg.out_dir);
  FeatureStore store = open_feature_store(cfg.features_dir());
  FoldPlan plan = plan_for(cfg, store);
  WeightArchive archive;
  const WeightArchive* archive_ptr = nullptr;
  if (cfg.init == InitMode::kPretrained) {
    archive = require_archive(cfg);
    archive_ptr = &archive;
  }
  ModelHandle model = build_backbone(cfg.architecture, cfg.init, store_num_classes(store),
                                     cfg.root_seed, archive_ptr);
  std::string run_id = single_run_id(cfg);
  RunRecord rec = train_model(model, store, plan, cfg.train, epoch_logger(run_id));
  rec.run_id = run_id;
  fs::path run_dir = cfg.runs_dir() / run_id;
  persist_run(rec, model, run_dir);
  echo_config(cfg, run_dir);
  note("train: " + run_id + " final val accuracy " + std::to_string(rec.final_val_accuracy));
  std::cout << run_dir.string() << "\n";
  return 0;
}

int cmd_cross_validate(const ExperimentConfig& cfg) {
  DirLock lock(cfg.out_dir);
  FeatureStore store = open_feature_store(cfg.features_dir());
  WeightArchive archive;
  const WeightArchive* archive_ptr = nullptr;
  if (cfg.init == InitMode::kPretrained) {
    archive = require_archive(cfg);
    archive_ptr = &archive;
  }
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = cfg.root_seed;
  CrossValResult result = cross_validate(cfg.architecture, cfg.init, archive_ptr, store, train_cfg,
                                         cfg.split_seed, cfg.runs_dir(), epoch_logger("cv"));
  for (const RunRecord& rec : result.runs) {
    if (!rec.diverged) echo_config(cfg, cfg.runs_dir() / rec.run_id);
  }
  note("cross-validate: mean accuracy " + std::to_string(result.mean_accuracy) +
       (result.complete ? "" : " (INCOMPLETE: diverged folds)"));
  std::cout << result.mean_accuracy << "\n";
  return result.complete ? 0 : 1;
}

int cmd_ensemble(const ExperimentConfig& cfg) {
  DirLock lock(cfg.out_dir);
  FeatureStore store = open_feature_store(cfg.features_dir());
  FoldPlan plan = plan_for(cfg, store);
  WeightArchive archive;
  const WeightArchive* archive_ptr = nullptr;
  if (cfg.init == InitMode::kPretrained) {
    archive = require_archive(cfg);
    archive_ptr = &archive;
  }
  EnsembleConfig ens;
  ens.members = cfg.ensemble_members;
  ens.root_seed = cfg.root_seed;
  EnsembleRunResult result = run_ensemble(cfg.architecture, cfg.init, archive_ptr, store, plan,
                                          cfg.train, ens, cfg.runs_dir(), epoch_logger("member"));
  size_t healthy = 0;
  for (bool h : result.healthy) healthy += h;
  if (healthy < 2) throw NumericError("ensemble: fewer than 2 healthy members survived training");

  // Reload the healthy members from their checkpoints and evaluate.
  std::vector<ModelHandle> members;
  std::vector<double> member_acc;
  for (size_t i = 0; i < result.runs.size(); ++i) {
    if (!result.healthy[i]) continue;
    WeightArchive ckpt = load_archive(cfg.runs_dir() / result.run_ids[i] / "checkpoint");
    ModelHandle m = build_backbone(cfg.architecture, InitMode::kRandom, store_num_classes(store),
                                   cfg.root_seed, nullptr);
    load_into_model(ckpt, m.net(), [](const std::string&) { return true; });
    m.architecture = cfg.architecture;
    members.push_back(std::move(m));
    member_acc.push_back(result.runs[i].final_val_accuracy);
  }
  Metrics metrics = ensemble_evaluate(members, store, plan.val_ids);

  std::string name = dataset_kind_name(cfg.dataset) + "-" + architecture_name(cfg.architecture) +
                     "-" + init_mode_name(cfg.init) + "-m" + std::to_string(cfg.ensemble_members) +
                     "-s" + std::to_string(cfg.root_seed);
  fs::path dir = cfg.ensembles_dir() / name;
  fs::create_directories(dir);
  write_ensemble_descriptor(result, ens, dir / "descriptor.json");
  write_ensemble_report_csv(member_acc, metrics.accuracy, dir / "report.csv");
  nlohmann::json summary;
  summary["dataset"] = dataset_kind_name(cfg.dataset);
  summary["architecture"] = architecture_name(cfg.architecture);
  summary["member_accuracies"] = member_acc;
  summary["ensemble_accuracy"] = metrics.accuracy;
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  echo_config(cfg, dir);
  note("ensemble: " + name + " accuracy " + std::to_string(metrics.accuracy));
  std::cout << dir.string() << "\n";
  return 0;
}

// Rebuilds a model from a persisted run checkpoint.
ModelHandle model_from_run(const ExperimentConfig& cfg, const FeatureStore& store,
                           const std::string& run_id, RunRecord* rec_out) {
  fs::path run_dir = cfg.runs_dir() / run_id;
  if (!fs::exists(run_dir / "record.json"))
    throw IoError("run not found: " + run_dir.string() + " (train first)");
  RunRecord rec = load_run_record(run_dir);
  WeightArchive ckpt = load_archive(run_dir / rec.checkpoint_dir);
  ModelHandle m = build_backbone(architecture_from_name(rec.architecture), InitMode::kRandom,
                                 store_num_classes(store), rec.config.seed, nullptr);
  load_into_model(ckpt, m.net(), [](const std::string&) { return true; });
  m.init_mode = init_mode_from_name(rec.init_mode);
  if (rec_out) *rec_out = rec;
  return m;
}

int cmd_analyze_svcca(const ExperimentConfig& cfg) {
  FeatureStore store = open_feature_store(cfg.features_dir());
  if (cfg.analyze_run.empty())
    throw ConfigError("analysis.run must name the fine-tuned run for svcca");
  RunRecord rec;
  ModelHandle after = model_from_run(cfg, store, cfg.analyze_run, &rec);
  // "before" reconstructs the run's initial weights from its seed (and the
  // pretrained archive when applicable).
  WeightArchive archive;
  const WeightArchive* archive_ptr = nullptr;
  InitMode init = init_mode_from_name(rec.init_mode);
  if (init == InitMode::kPretrained) {
    archive = require_archive(cfg);
    archive_ptr = &archive;
  }
  ModelHandle before = build_backbone(architecture_from_name(rec.architecture), init,
                                      store_num_classes(store), rec.config.seed, archive_ptr);
  FoldPlan plan = rec.fold ? store_fold_plan(store, *rec.fold)
                           : store_fold_plan_seeded(store, rec.split_seed.value_or(cfg.split_seed));
  std::vector<SegmentScore> curve =
      weights_change_curve(before, after, store, plan.val_ids, cfg.variance_keep);
  fs::create_directories(cfg.analysis_dir());
  std::ostringstream csv;
  csv << "segment,mean_correlation,run_id\n";
  for (const SegmentScore& s : curve)
    csv << s.segment << "," << s.mean_correlation << "," << cfg.analyze_run << "\n";
  fs::path out_csv = cfg.analysis_dir() / "svcca.csv";
  write_text_file(out_csv, csv.str());
  echo_config(cfg, cfg.analysis_dir());
  note("analyze svcca: wrote " + out_csv.string());
  std::cout << out_csv.string() << "\n";
  return 0;
}

int cmd_analyze_ablation(const ExperimentConfig& cfg, AblationKind kind) {
  FeatureStore store = open_feature_store(cfg.features_dir());
  FoldPlan plan = plan_for(cfg, store);
  WeightArchive archive = require_archive(cfg);
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = cfg.root_seed;
  AblationCurve curve = run_ablation_suite(kind, cfg.architecture, archive, store, plan, train_cfg,
                                           cfg.runs_dir(), epoch_logger(ablation_kind_name(kind)));
  fs::create_directories(cfg.analysis_dir());
  fs::path out_csv = cfg.analysis_dir() / (ablation_kind_name(kind) + ".csv");
  write_ablation_csv(curve, out_csv);
  std::vector<Series> series{{ablation_kind_name(kind),
                              curve.val_accuracies,
                              {31, 119, 180}}};
  double lo = 1.0, hi = 0.0;
  for (double v : curve.val_accuracies) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  Image img = plot_series(series, curve.cut_points, ablation_kind_name(kind),
                          std::max(0.0, lo - 0.05), std::min(1.0, hi + 0.05));
  write_png(img, cfg.analysis_dir() / (ablation_kind_name(kind) + ".png"));
  echo_config(cfg, cfg.analysis_dir());
  note("analyze " + ablation_kind_name(kind) + ": wrote " + out_csv.string() +
       (curve.partial ? " (PARTIAL: diverged points)" : ""));
  std::cout << out_csv.string() << "\n";
  return curve.partial ? 1 : 0;
}

int cmd_analyze_ig(const ExperimentConfig& cfg) {
  FeatureStore store = open_feature_store(cfg.features_dir());
  if (cfg.ig_clip.empty()) throw ConfigError("analysis.ig_clip must name a clip");
  if (!store.records.count(cfg.ig_clip))
    throw IoError("feature store has no record '" + cfg.ig_clip + "'");
  ModelHandle model = [&] {
    if (!cfg.analyze_run.empty()) return model_from_run(cfg, store, cfg.analyze_run, nullptr);
    WeightArchive archive = require_archive(cfg);
    return build_backbone(cfg.architecture, InitMode::kPretrained, store_num_classes(store),
                          cfg.root_seed, &archive);
  }();
  MelTensor mel = load_record(store, cfg.ig_clip);
  nn::Tensor<float> x({1, MelTensor::kChannels, mel.n_mels, mel.width});
  std::copy(mel.values.begin(), mel.values.end(), x.v.begin());
  int target = cfg.ig_target;
  if (target < 0) target = store.records.at(cfg.ig_clip).label;
  AttributionMap map = integrated_gradients(model.net(), x, min_baseline(x), cfg.ig_steps, target);
  fs::create_directories(cfg.analysis_dir());
  fs::path png = cfg.analysis_dir() / ("ig_" + cfg.ig_clip + ".png");
  fs::path js = cfg.analysis_dir() / ("ig_" + cfg.ig_clip + ".json");
  render_attribution(mel, map, png);
  write_attribution_json(map, js);
  echo_config(cfg, cfg.analysis_dir());
  note("analyze ig: residual " + std::to_string(map.completeness_residual));
  std::cout << png.string() << "\n";
  return 0;
}

int cmd_report(const ExperimentConfig& cfg) {
  // Read-only over the run registry: no lock taken.
  std::vector<RunSummary> runs = collect_run_summaries(cfg.runs_dir());
  fs::create_directories(cfg.report_dir());
  write_text_file(cfg.report_dir() / "table1.csv", table1_csv(runs));
  std::vector<EnsembleSummary> ens = collect_ensemble_summaries(cfg.ensembles_dir());
  write_text_file(cfg.report_dir() / "table2.csv", table2_csv(ens));
  bool fig = emit_analysis_figure(cfg.analysis_dir(), cfg.report_dir() / "fig2.png");
  note("report: " + std::to_string(runs.size()) + " runs, " + std::to_string(ens.size()) +
       " ensembles" + (fig ? ", analysis figure" : ""));
  std::cout << (cfg.report_dir() / "table1.csv").string() << "\n";
  return 0;
}

int cmd_import_weights(const fs::path& npy_dir, const fs::path& out_dir,
                       const std::string& provenance) {
  WeightArchive a = import_npy_dir(npy_dir, provenance);
  save_archive(a, out_dir);
  note("import-weights: " + std::to_string(a.order.size()) + " tensors -> " + out_dir.string());
  std::cout << out_dir.string() << "\n";
  return 0;
}

// Synthesizes a genre-directory tone dataset for the "tones" kind: each
// class is a band of fundamental frequencies with harmonics and noise.
int cmd_synth_tones(const fs::path& out_dir, int classes, int clips_per_class, double seconds,
                    uint64_t seed) {
  if (classes < 2 || clips_per_class < 1) throw ConfigError("synth-tones: need >= 2 classes");
  const int sr = 22050;
  Rng rng(seed);
  for (int c = 0; c < classes; ++c) {
    fs::path dir = out_dir / ("tone" + std::to_string(c));
    fs::create_directories(dir);
    for (int i = 0; i < clips_per_class; ++i) {
      double f0 = 150.0 * std::pow(2.0, c) * (1.0 + 0.08 * (rng.uniform() - 0.5));
      size_t n = static_cast<size_t>(seconds * sr);
      std::vector<float> x(n);
      double phase = rng.uniform() * 6.283185307179586;
      for (size_t t = 0; t < n; ++t) {
        double s = 0.55 * std::sin(6.283185307179586 * f0 * t / sr + phase) +
                   0.25 * std::sin(6.283185307179586 * 2.0 * f0 * t / sr) +
                   0.05 * (rng.uniform() * 2.0 - 1.0);
        x[t] = static_cast<float>(0.6 * s);
      }
      char name[64];
      std::snprintf(name, sizeof(name), "tone%d.%05d.wav", c, i);
      write_wav(dir / name, x, 1, sr);
    }
  }
  note("synth-tones: wrote " + std::to_string(classes * clips_per_class) + " clips to " +
       out_dir.string());
  std::cout << out_dir.string() << "\n";
  return 0;
}

struct CommonFlags {
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_file, "TOML or JSON config file");
  auto set = [&flags](const std::string& key) {
    return [&flags, key](const std::string& v) { flags.overrides[key] = v; };
  };
  auto set_str = [&flags](const std::string& key) {
    return [&flags, key](const std::string& v) { flags.overrides[key] = "\"" + v + "\""; };
  };
  cmd->add_option_function<std::string>("--dataset", set_str("dataset.kind"),
                                        "Dataset kind (esc50|urbansound8k|gtzan|tones)");
  cmd->add_option_function<std::string>("--data-root", set_str("dataset.root"), "Dataset root dir");
  cmd->add_option_function<std::string>("--fold", set("dataset.fold"), "Validation fold index");
  cmd->add_option_function<std::string>("--split-seed", set("dataset.split_seed"),
                                        "Seed for datasets without official folds");
  cmd->add_option_function<std::string>("--arch", set_str("model.architecture"),
                                        "tiny|densenet201|resnet50|inceptionv3");
  cmd->add_option_function<std::string>("--init", set_str("model.init"), "pretrained|random");
  cmd->add_option_function<std::string>("--archive", set_str("model.pretrained_archive"),
                                        "Pretrained weight archive directory");
  cmd->add_option_function<std::string>("--regime", set_str("train.regime"),
                                        "pretrained70|scratch450");
  cmd->add_option_function<std::string>("--epochs", set("train.epochs"), "Training epochs");
  cmd->add_option_function<std::string>("--batch-size", set("train.batch_size"), "Batch size");
  cmd->add_option_function<std::string>("--lr", set("train.lr"), "Base learning rate");
  cmd->add_option_function<std::string>("--weight-decay", set("train.weight_decay"), "Weight decay");
  cmd->add_option_function<std::string>("--augment", set("dsp.augment"), "true|false");
  cmd->add_option_function<std::string>("--members", set("ensemble.members"), "Ensemble size");
  cmd->add_option_function<std::string>("--ig-steps", set("analysis.ig_steps"), "IG step count");
  cmd->add_option_function<std::string>("--clip", set_str("analysis.ig_clip"), "Clip id for IG");
  cmd->add_option_function<std::string>("--target", set("analysis.ig_target"), "IG target class");
  cmd->add_option_function<std::string>("--run", set_str("analysis.run"), "Run id to analyze");
  cmd->add_option_function<std::string>("--out", set_str("output.dir"), "Output directory");
  cmd->add_option_function<std::string>("--seed", set("root_seed"), "Root seed");
}

ExperimentConfig resolve(const CommonFlags& flags) {
  std::optional<fs::path> file;
  if (!flags.config_file.empty()) file = flags.config_file;
  return parse_and_validate(file, flags.overrides);
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"auralab: audio transfer-learning laboratory"};
  app.require_subcommand(1);

  CommonFlags prep_flags, train_flags, cv_flags, ens_flags, report_flags;
  CommonFlags svcca_flags, fusion_flags, freeze_flags, cutoff_flags, ig_flags;

  CLI::App* prep = app.add_subcommand("prep", "Build the feature cache for a dataset");
  add_common_flags(prep, prep_flags);
  CLI::App* train = app.add_subcommand("train", "Train one model on one fold");
  add_common_flags(train, train_flags);
  CLI::App* cv = app.add_subcommand("cross-validate", "Train and evaluate across all folds");
  add_common_flags(cv, cv_flags);
  CLI::App* ens = app.add_subcommand("ensemble", "Train an M-member deep ensemble");
  add_common_flags(ens, ens_flags);
  CLI::App* analyze = app.add_subcommand("analyze", "Transfer-learning analyses");
  analyze->require_subcommand(1);
  CLI::App* svcca = analyze->add_subcommand("svcca", "Representation change before/after training");
  add_common_flags(svcca, svcca_flags);
  CLI::App* fusion = analyze->add_subcommand("fusion", "Pretrained-prefix fusion curve");
  add_common_flags(fusion, fusion_flags);
  CLI::App* freeze = analyze->add_subcommand("freeze", "Frozen-prefix curve");
  add_common_flags(freeze, freeze_flags);
  CLI::App* cutoff = analyze->add_subcommand("cutoff", "Truncated-network curve");
  add_common_flags(cutoff, cutoff_flags);
  CLI::App* ig = analyze->add_subcommand("ig", "Integrated-gradients attribution for one clip");
  add_common_flags(ig, ig_flags);
  CLI::App* report = app.add_subcommand("report", "Emit accuracy tables and figures");
  add_common_flags(report, report_flags);

  std::string npy_dir, archive_out, provenance = "imported";
  CLI::App* import_cmd = app.add_subcommand("import-weights",
                                            "Convert a directory of .npy tensors into an archive");
  import_cmd->add_option("--npy-dir", npy_dir, "Directory of .npy files")->required();
  import_cmd->add_option("--out", archive_out, "Output archive directory")->required();
  import_cmd->add_option("--provenance", provenance, "Provenance tag");

  std::string tones_out;
  int tones_classes = 2, tones_clips = 50;
  double tones_seconds = 1.0;
  uint64_t tones_seed = 0;
  CLI::App* synth = app.add_subcommand("synth-tones", "Generate the synthetic tone dataset");
  synth->add_option("--out", tones_out, "Output directory")->required();
  synth->add_option("--classes", tones_classes, "Number of tone classes");
  synth->add_option("--clips-per-class", tones_clips, "Clips per class");
  synth->add_option("--seconds", tones_seconds, "Clip length in seconds");
  synth->add_option("--seed", tones_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (prep->parsed()) return cmd_prep(resolve(prep_flags));
    if (train->parsed()) return cmd_train(resolve(train_flags));
    if (cv->parsed()) return cmd_cross_validate(resolve(cv_flags));
    if (ens->parsed()) return cmd_ensemble(resolve(ens_flags));
    if (analyze->parsed()) {
      if (svcca->parsed()) return cmd_analyze_svcca(resolve(svcca_flags));
      if (fusion->parsed()) return cmd_analyze_ablation(resolve(fusion_flags), AblationKind::kFusion);
      if (freeze->parsed()) return cmd_analyze_ablation(resolve(freeze_flags), AblationKind::kFreeze);
      if (cutoff->parsed()) return cmd_analyze_ablation(resolve(cutoff_flags), AblationKind::kCutoff);
      if (ig->parsed()) return cmd_analyze_ig(resolve(ig_flags));
    }
    if (report->parsed()) return cmd_report(resolve(report_flags));
    if (import_cmd->parsed()) return cmd_import_weights(npy_dir, archive_out, provenance);
    if (synth->parsed())
      return cmd_synth_tones(tones_out, tones_classes, tones_clips, tones_seconds, tones_seed);
    std::cerr << "error: no command\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace auralab
