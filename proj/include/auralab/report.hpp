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
// Read-only report emitters over the run registry: accuracy tables
// (pretrained vs random; single vs ensemble) and curve figures.

#ifndef AURALAB_REPORT_HPP_
#define AURALAB_REPORT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "auralab/common.hpp"

namespace auralab {

struct RunSummary {
  std::string run_id;
  std::string dataset;
  std::string architecture;
  std::string init_mode;
  std::optional<int> fold;
  double final_val_accuracy = 0.0;
  bool diverged = false;
};

std::vector<RunSummary> collect_run_summaries(const fs::path& runs_dir);

// Accuracy by (architecture x dataset x init); cell = mean over the group's
// runs, rendered as percent with two decimals. Empty cell when absent.
std::string table1_csv(const std::vector<RunSummary>& runs);

struct EnsembleSummary {
  std::string dataset;
  std::string architecture;
  std::vector<double> member_accuracies;
  double ensemble_accuracy = 0.0;
};

std::vector<EnsembleSummary> collect_ensemble_summaries(const fs::path& ensembles_dir);

// Single (mean +- std over members) vs ensemble accuracy.
std::string table2_csv(const std::vector<EnsembleSummary>& ensembles);

// Replots every ablation/similarity curve CSV found under analysis_dir into
// out_png; returns false when there are no curves to plot.
bool emit_analysis_figure(const fs::path& analysis_dir, const fs::path& out_png);

}  // namespace auralab

#endif  // AURALAB_REPORT_HPP_
