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

#include "auralab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "auralab/image.hpp"

namespace auralab {

using nlohmann::json;

std::vector<RunSummary> collect_run_summaries(const fs::path& runs_dir) {
  std::vector<RunSummary> out;
  if (!fs::is_directory(runs_dir)) return out;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "record.json")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const fs::path& dir : dirs) {
    json j = json::parse(read_text_file(dir / "record.json"));
    RunSummary s;
    s.run_id = j.value("run_id", dir.filename().string());
    s.dataset = j.at("dataset").get<std::string>();
    s.architecture = j.at("architecture").get<std::string>();
    s.init_mode = j.at("init_mode").get<std::string>();
    if (j.contains("fold")) s.fold = j.at("fold").get<int>();
    s.final_val_accuracy = j.at("final_val_accuracy").get<double>();
    s.diverged = j.value("diverged", false);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

const std::vector<std::string>& table_datasets() {
  static const std::vector<std::string> d = {"gtzan", "esc50", "urbansound8k", "tones"};
  return d;
}

}  // namespace

std::string table1_csv(const std::vector<RunSummary>& runs) {
  // arch -> dataset -> init -> accuracies
  std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>> cells;
  std::set<std::string> present_datasets;
  for (const RunSummary& r : runs) {
    if (r.diverged) continue;
    cells[r.architecture][r.dataset][r.init_mode].push_back(r.final_val_accuracy);
    present_datasets.insert(r.dataset);
  }
  std::ostringstream csv;
  csv << "model";
  std::vector<std::string> datasets;
  for (const std::string& d : table_datasets())
    if (present_datasets.count(d)) datasets.push_back(d);
  for (const std::string& d : datasets) csv << "," << d << "_pretrained," << d << "_random";
  csv << "\n";
  for (const auto& [arch, by_dataset] : cells) {
    csv << arch;
    for (const std::string& d : datasets) {
      for (const char* init : {"pretrained", "random"}) {
        csv << ",";
        auto dit = by_dataset.find(d);
        if (dit == by_dataset.end()) continue;
        auto iit = dit->second.find(init);
        if (iit == dit->second.end() || iit->second.empty()) continue;
        double sum = 0.0;
        for (double a : iit->second) sum += a;
        csv << pct(sum / static_cast<double>(iit->second.size()));
      }
    }
    csv << "\n";
  }
  return csv.str();
}

std::vector<EnsembleSummary> collect_ensemble_summaries(const fs::path& ensembles_dir) {
  std::vector<EnsembleSummary> out;
  if (!fs::is_directory(ensembles_dir)) return out;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(ensembles_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "summary.json")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const fs::path& dir : dirs) {
    json j = json::parse(read_text_file(dir / "summary.json"));
    EnsembleSummary s;
    s.dataset = j.at("dataset").get<std::string>();
    s.architecture = j.at("architecture").get<std::string>();
    s.member_accuracies = j.at("member_accuracies").get<std::vector<double>>();
    s.ensemble_accuracy = j.at("ensemble_accuracy").get<double>();
    out.push_back(std::move(s));
  }
  return out;
}

std::string table2_csv(const std::vector<EnsembleSummary>& ensembles) {
  std::map<std::string, std::map<std::string, const EnsembleSummary*>> cells;
  std::set<std::string> present_datasets;
  for (const EnsembleSummary& e : ensembles) {
    cells[e.architecture][e.dataset] = &e;
    present_datasets.insert(e.dataset);
  }
  std::vector<std::string> datasets;
  for (const std::string& d : table_datasets())
    if (present_datasets.count(d)) datasets.push_back(d);
  std::ostringstream csv;
  csv << "model";
  for (const std::string& d : datasets)
    csv << "," << d << "_single_mean," << d << "_single_std," << d << "_ensemble";
  csv << "\n";
  for (const auto& [arch, by_dataset] : cells) {
    csv << arch;
    for (const std::string& d : datasets) {
      auto it = by_dataset.find(d);
      if (it == by_dataset.end()) {
        csv << ",,,";
        continue;
      }
      const auto& acc = it->second->member_accuracies;
      double mean = 0.0;
      for (double a : acc) mean += a;
      mean /= static_cast<double>(acc.size());
      double var = 0.0;
      for (double a : acc) var += (a - mean) * (a - mean);
      double stddev = acc.size() > 1 ? std::sqrt(var / static_cast<double>(acc.size() - 1)) : 0.0;
      csv << "," << pct(mean) << "," << pct(stddev) << "," << pct(it->second->ensemble_accuracy);
    }
    csv << "\n";
  }
  return csv.str();
}

bool emit_analysis_figure(const fs::path& analysis_dir, const fs::path& out_png) {
  if (!fs::is_directory(analysis_dir)) return false;
  std::vector<fs::path> csvs;
  for (const auto& entry : fs::directory_iterator(analysis_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") csvs.push_back(entry.path());
  std::sort(csvs.begin(), csvs.end());
  if (csvs.empty()) return false;
  static const Rgb palette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40},
                                {148, 103, 189}};
  std::vector<Series> series;
  std::vector<std::string> x_labels;
  for (const fs::path& path : csvs) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::getline(in, line);  // header
    Series s;
    s.label = path.stem().string();
    s.color = palette[series.size() % 5];
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string x, y;
      std::getline(row, x, ',');
      std::getline(row, y, ',');
      try {
        double v = std::stod(y);
        if (std::isfinite(v)) {
          labels.push_back(x);
          s.y.push_back(v);
        }
      } catch (...) {
      }
    }
    if (s.y.empty()) continue;
    if (labels.size() > x_labels.size()) x_labels = labels;
    series.push_back(std::move(s));
  }
  if (series.empty()) return false;
  double lo = 1e300, hi = -1e300;
  for (const Series& s : series)
    for (double v : s.y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi - lo < 1e-9) {
    hi += 0.5;
    lo -= 0.5;
  }
  double pad = (hi - lo) * 0.1;
  Image img = plot_series(series, x_labels, "analysis curves", std::max(0.0, lo - pad), hi + pad);
  write_png(img, out_png);
  return true;
}

}  // namespace auralab
