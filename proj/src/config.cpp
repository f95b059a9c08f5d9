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

#include "auralab/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace auralab {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

json parse_toml_value(const std::string& raw, int line_no) {
  std::string v = trim(raw);
  if (v.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
    std::string out;
    for (size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        ++i;
        out += v[i];
      } else {
        out += v[i];
      }
    }
    return json(out);
  }
  if (v.front() == '[') {
    if (v.back() != ']')
      throw ConfigError("config line " + std::to_string(line_no) + ": unterminated array");
    json arr = json::array();
    std::string body = v.substr(1, v.size() - 2);
    std::string item;
    int depth = 0;
    bool in_string = false;
    for (char c : body) {
      if (c == '"') in_string = !in_string;
      if (!in_string && c == '[') ++depth;
      if (!in_string && c == ']') --depth;
      if (!in_string && depth == 0 && c == ',') {
        if (!trim(item).empty()) arr.push_back(parse_toml_value(item, line_no));
        item.clear();
      } else {
        item += c;
      }
    }
    if (!trim(item).empty()) arr.push_back(parse_toml_value(item, line_no));
    return arr;
  }
  if (v == "true") return json(true);
  if (v == "false") return json(false);
  // Number: integer when it looks like one, double otherwise.
  bool is_int = !v.empty();
  for (size_t i = 0; i < v.size(); ++i) {
    char c = v[i];
    if (i == 0 && (c == '-' || c == '+')) continue;
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      is_int = false;
      break;
    }
  }
  try {
    if (is_int) return json(std::stoll(v));
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size())
      throw ConfigError("config line " + std::to_string(line_no) + ": bad value '" + v + "'");
    return json(d);
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    throw ConfigError("config line " + std::to_string(line_no) + ": bad value '" + v + "'");
  }
}

}  // namespace

json parse_toml(const std::string& text) {
  json root = json::object();
  json* section = &root;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments outside strings.
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line = line.substr(0, i);
        break;
      }
    }
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
      std::string name = trim(t.substr(1, t.size() - 2));
      if (name.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
      section = &root[name];
      if (!section->is_object()) *section = json::object();
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    (*section)[key] = parse_toml_value(t.substr(eq + 1), line_no);
  }
  return root;
}

namespace {

class SchemaReader {
 public:
  SchemaReader(json merged) : doc_(std::move(merged)) {}

  json* find(const std::string& section, const std::string& key) {
    json* scope = &doc_;
    if (!section.empty()) {
      if (!doc_.contains(section)) return nullptr;
      scope = &doc_[section];
    }
    if (!scope->contains(key)) return nullptr;
    consumed_.insert(section.empty() ? key : section + "." + key);
    return &(*scope)[key];
  }

  template <typename T, typename Convert>
  void read(const std::string& section, const std::string& key, T* out, Convert convert) {
    json* v = find(section, key);
    if (!v) return;
    std::string full = section.empty() ? key : section + "." + key;
    try {
      *out = convert(*v);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + full + "' has the wrong type");
    }
  }

  // Every key present in the document must have been consumed.
  void reject_unknown() const {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : doc_.items()) {
      if (v.is_object()) {
        for (const auto& [k2, v2] : v.items()) {
          if (!consumed_.count(k + "." + k2)) unknown.push_back(k + "." + k2);
        }
      } else if (!consumed_.count(k)) {
        unknown.push_back(k);
      }
    }
    if (!unknown.empty()) {
      std::sort(unknown.begin(), unknown.end());
      std::string msg = "unknown config key(s):";
      for (const auto& k : unknown) msg += " '" + k + "'";
      throw ConfigError(msg);
    }
  }

 private:
  json doc_;
  std::set<std::string> consumed_;
};

uint64_t to_u64(const json& v) {
  if (v.is_number_integer()) return v.get<uint64_t>();
  throw std::runtime_error("not an integer");
}

int to_int(const json& v) {
  if (v.is_number_integer()) return v.get<int>();
  throw std::runtime_error("not an integer");
}

double to_double(const json& v) {
  if (v.is_number()) return v.get<double>();
  throw std::runtime_error("not a number");
}

bool to_bool(const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  throw std::runtime_error("not a boolean");
}

std::string to_str(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  throw std::runtime_error("not a string");
}

std::vector<double> to_double_vec(const json& v) {
  if (!v.is_array()) throw std::runtime_error("not an array");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(to_double(x));
  return out;
}

std::vector<int> to_int_vec(const json& v) {
  if (!v.is_array()) throw std::runtime_error("not an array");
  std::vector<int> out;
  for (const auto& x : v) out.push_back(to_int(x));
  return out;
}

std::string toml_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string ExperimentConfig::to_toml() const {
  std::ostringstream o;
  o << "root_seed = " << root_seed << "\n\n";
  o << "[dataset]\n";
  o << "kind = " << toml_string(dataset_kind_name(dataset)) << "\n";
  o << "root = " << toml_string(dataset_root.string()) << "\n";
  o << "fold = " << fold << "\n";
  o << "split_seed = " << split_seed << "\n\n";
  o << "[dsp]\n";
  o << "mel_scale = " << toml_string(mel_scale == MelScale::kSlaney ? "slaney" : "htk") << "\n";
  o << "augment = " << (augment ? "true" : "false") << "\n";
  o << "stretch_rates = [";
  for (size_t i = 0; i < augmentation.stretch_rates.size(); ++i)
    o << (i ? ", " : "") << augmentation.stretch_rates[i];
  o << "]\n";
  o << "pitch_semitones = [";
  for (size_t i = 0; i < augmentation.pitch_semitones.size(); ++i)
    o << (i ? ", " : "") << augmentation.pitch_semitones[i];
  o << "]\n\n";
  o << "[model]\n";
  o << "architecture = " << toml_string(architecture_name(architecture)) << "\n";
  o << "init = " << toml_string(init_mode_name(init)) << "\n";
  o << "pretrained_archive = " << toml_string(pretrained_archive.string()) << "\n\n";
  o << "[train]\n";
  o << "regime = " << toml_string(regime_name(train.regime)) << "\n";
  o << "lr = " << train.base_lr << "\n";
  o << "weight_decay = " << train.weight_decay << "\n";
  o << "batch_size = " << train.batch_size << "\n";
  o << "epochs = " << train.epochs << "\n";
  o << "lr_drop_epochs = [";
  for (size_t i = 0; i < train.lr_drop_epochs.size(); ++i)
    o << (i ? ", " : "") << train.lr_drop_epochs[i];
  o << "]\n";
  o << "drop_factor = " << train.drop_factor << "\n";
  o << "decoupled_weight_decay = " << (train.decoupled_weight_decay ? "true" : "false") << "\n";
  o << "include_augmented = " << (train.include_augmented ? "true" : "false") << "\n\n";
  o << "[ensemble]\n";
  o << "members = " << ensemble_members << "\n\n";
  o << "[analysis]\n";
  o << "variance_keep = " << variance_keep << "\n";
  o << "ig_steps = " << ig_steps << "\n";
  o << "ig_clip = " << toml_string(ig_clip) << "\n";
  o << "ig_target = " << ig_target << "\n";
  o << "run = " << toml_string(analyze_run) << "\n\n";
  o << "[output]\n";
  o << "dir = " << toml_string(out_dir.string()) << "\n";
  return o.str();
}

ExperimentConfig parse_and_validate(const std::optional<fs::path>& config_file,
                                    const std::map<std::string, std::string>& overrides) {
  json doc = json::object();
  if (config_file) {
    if (!fs::exists(*config_file))
      throw ConfigError("config file not found: " + config_file->string());
    std::string text = read_text_file(*config_file);
    if (config_file->extension() == ".json") {
      try {
        doc = json::parse(text);
      } catch (const std::exception& ex) {
        throw ConfigError("config file is not valid JSON: " + std::string(ex.what()));
      }
      if (!doc.is_object()) throw ConfigError("config file must hold an object");
    } else {
      doc = parse_toml(text);
    }
  }
  for (const auto& [full_key, raw] : overrides) {
    json value = parse_toml_value(raw, 0);
    size_t dot = full_key.find('.');
    if (dot == std::string::npos) {
      doc[full_key] = value;
    } else {
      std::string section = full_key.substr(0, dot);
      if (!doc.contains(section) || !doc[section].is_object()) doc[section] = json::object();
      doc[section][full_key.substr(dot + 1)] = value;
    }
  }

  SchemaReader r(doc);
  ExperimentConfig cfg;
  r.read("", "root_seed", &cfg.root_seed, to_u64);

  r.read("dataset", "kind", &cfg.dataset,
         [](const json& v) { return dataset_kind_from_name(to_str(v)); });
  r.read("dataset", "root", &cfg.dataset_root, [](const json& v) { return fs::path(to_str(v)); });
  r.read("dataset", "fold", &cfg.fold, to_int);
  r.read("dataset", "split_seed", &cfg.split_seed, to_u64);

  // Augmentation defaults on for ESC-50 only, matching the training protocol.
  cfg.augment = cfg.dataset == DatasetKind::kEsc50;
  r.read("dsp", "mel_scale", &cfg.mel_scale, [](const json& v) {
    std::string s = to_str(v);
    if (s == "slaney") return MelScale::kSlaney;
    if (s == "htk") return MelScale::kHtk;
    throw ConfigError("config key 'dsp.mel_scale' must be slaney or htk");
  });
  r.read("dsp", "augment", &cfg.augment, to_bool);
  r.read("dsp", "stretch_rates", &cfg.augmentation.stretch_rates, to_double_vec);
  r.read("dsp", "pitch_semitones", &cfg.augmentation.pitch_semitones, to_double_vec);

  r.read("model", "architecture", &cfg.architecture,
         [](const json& v) { return architecture_from_name(to_str(v)); });
  r.read("model", "init", &cfg.init, [](const json& v) { return init_mode_from_name(to_str(v)); });
  r.read("model", "pretrained_archive", &cfg.pretrained_archive,
         [](const json& v) { return fs::path(to_str(v)); });

  // Regime presets first, explicit fields afterwards.
  Regime regime = cfg.init == InitMode::kRandom ? Regime::kScratch450 : Regime::kPretrained70;
  if (json* v = r.find("train", "regime")) {
    regime = regime_from_name(to_str(*v));
    cfg.regime_explicit = true;
  }
  cfg.train = default_train_config(regime);
  r.read("train", "lr", &cfg.train.base_lr, to_double);
  r.read("train", "weight_decay", &cfg.train.weight_decay, to_double);
  r.read("train", "batch_size", &cfg.train.batch_size, to_int);
  bool epochs_explicit = false;
  r.read("train", "epochs", &cfg.train.epochs, [&](const json& v) {
    epochs_explicit = true;
    return to_int(v);
  });
  bool drops_explicit = false;
  r.read("train", "lr_drop_epochs", &cfg.train.lr_drop_epochs, [&](const json& v) {
    drops_explicit = true;
    return to_int_vec(v);
  });
  if (epochs_explicit && !drops_explicit) {
    // Preset drop epochs that no longer fit the shortened run are pruned.
    std::vector<int> kept;
    for (int e : cfg.train.lr_drop_epochs)
      if (e < cfg.train.epochs) kept.push_back(e);
    cfg.train.lr_drop_epochs = std::move(kept);
  }
  r.read("train", "drop_factor", &cfg.train.drop_factor, to_double);
  r.read("train", "decoupled_weight_decay", &cfg.train.decoupled_weight_decay, to_bool);
  r.read("train", "include_augmented", &cfg.train.include_augmented, to_bool);

  r.read("ensemble", "members", &cfg.ensemble_members, to_int);

  r.read("analysis", "variance_keep", &cfg.variance_keep, to_double);
  r.read("analysis", "ig_steps", &cfg.ig_steps, to_int);
  r.read("analysis", "ig_clip", &cfg.ig_clip, to_str);
  r.read("analysis", "ig_target", &cfg.ig_target, to_int);
  r.read("analysis", "run", &cfg.analyze_run, to_str);

  r.read("output", "dir", &cfg.out_dir, [](const json& v) { return fs::path(to_str(v)); });

  r.reject_unknown();

  cfg.train.seed = cfg.root_seed;
  cfg.train.validate();
  if (cfg.fold < 1) throw ConfigError("config key 'dataset.fold' must be at least 1");
  if (cfg.ensemble_members < 2)
    throw ConfigError("config key 'ensemble.members' must be at least 2");
  if (cfg.variance_keep <= 0.0 || cfg.variance_keep > 1.0)
    throw ConfigError("config key 'analysis.variance_keep' must be in (0, 1]");
  if (cfg.ig_steps < 1) throw ConfigError("config key 'analysis.ig_steps' must be at least 1");
  for (double rate : cfg.augmentation.stretch_rates) {
    if (rate < 0.5 || rate > 2.0)
      throw ConfigError("config key 'dsp.stretch_rates' entries must lie in [0.5, 2.0]");
  }
  for (double st : cfg.augmentation.pitch_semitones) {
    if (st < -12.0 || st > 12.0)
      throw ConfigError("config key 'dsp.pitch_semitones' entries must lie in [-12, 12]");
  }
  return cfg;
}

}  // namespace auralab
