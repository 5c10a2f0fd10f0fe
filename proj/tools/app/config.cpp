// Copyright 2026 The MC-CNN Authors
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

#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mccnn/error.hpp"

namespace mccnn::app {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <typename T>
T number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError("malformed value '" + value + "' for key '" + key + "'", key);
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw ConfigError("value for key '" + key + "' must be finite", key);
  }
  return out;
}

std::size_t positive(const std::string& key, const std::string& value) {
  const auto v = number<std::size_t>(key, value);
  if (v == 0) throw ConfigError("key '" + key + "' must be >= 1", key);
  return v;
}

bool boolean(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + value + "'", key);
}

std::pair<std::size_t, std::size_t> grid(const std::string& key, const std::string& value) {
  const auto x = value.find_first_of("xX");
  if (x == std::string::npos) throw ConfigError("key '" + key + "' expects HxW, got '" + value + "'", key);
  return {positive(key, value.substr(0, x)), positive(key, value.substr(x + 1))};
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), xs[i]);
    s += (i ? "," : "") + std::string(buf, end);
  }
  return s;
}

std::string fmt(double v) { return join_doubles({v}); }

template <typename F>
auto rethrow_as(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (e.key() == key) throw;
    throw ConfigError(e.what(), key);
  }
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](RunConfig& c, const auto& k, const auto& v) { c.seed = number<std::uint64_t>(k, v); }},
      {"out",
       [](RunConfig& c, const auto& k, const auto& v) {
         if (v.empty()) throw ConfigError("output directory must not be empty", k);
         c.out = v;
       }},
      {"n_ad", [](RunConfig& c, const auto& k, const auto& v) { c.data.n_ad = number<int>(k, v); }},
      {"n_normal", [](RunConfig& c, const auto& k, const auto& v) { c.data.n_normal = number<int>(k, v); }},
      {"refs", [](RunConfig& c, const auto& k, const auto& v) { c.data.references = positive(k, v); }},
      {"adherence_ad",
       [](RunConfig& c, const auto& k, const auto& v) { c.data.cohort.ad.adherence = number<double>(k, v); }},
      {"adherence_normal",
       [](RunConfig& c, const auto& k, const auto& v) { c.data.cohort.normal.adherence = number<double>(k, v); }},
      {"dispersion_ad",
       [](RunConfig& c, const auto& k, const auto& v) { c.data.cohort.ad.dispersion = number<double>(k, v); }},
      {"dispersion_normal",
       [](RunConfig& c, const auto& k, const auto& v) { c.data.cohort.normal.dispersion = number<double>(k, v); }},
      {"adherence_jitter",
       [](RunConfig& c, const auto& k, const auto& v) { c.data.cohort.adherence_jitter = number<double>(k, v); }},
      {"min_fixations",
       [](RunConfig& c, const auto& k, const auto& v) { c.data.cohort.min_fixations = number<int>(k, v); }},
      {"max_fixations",
       [](RunConfig& c, const auto& k, const auto& v) { c.data.cohort.max_fixations = number<int>(k, v); }},
      {"grid",
       [](RunConfig& c, const auto& k, const auto& v) {
         const auto [h, w] = grid(k, v);
         c.data.heatmap.height = h;
         c.data.heatmap.width = w;
       }},
      {"sigma", [](RunConfig& c, const auto& k, const auto& v) { c.sigma = number<double>(k, v); }},
      {"weighting",
       [](RunConfig& c, const auto& k, const auto& v) {
         if (v == "duration") {
           c.data.heatmap.weighting = ImpulseWeighting::kDuration;
         } else if (v == "unit") {
           c.data.heatmap.weighting = ImpulseWeighting::kUnit;
         } else {
           throw ConfigError("key '" + k + "' expects duration or unit", k);
         }
       }},
      {"merge", [](RunConfig& c, const auto& k, const auto& v) { c.data.merge_channels = boolean(k, v); }},
      {"split",
       [](RunConfig& c, const auto& k, const auto& v) { c.split = rethrow_as(k, [&] { return parse_split_mode(v); }); }},
      {"ratios",
       [](RunConfig& c, const auto& k, const auto& v) {
         const auto parts = split_list(v);
         if (parts.size() != 3) throw ConfigError("key '" + k + "' expects train,validation,test", k);
         c.ratios = SplitRatios{number<double>(k, parts[0]), number<double>(k, parts[1]), number<double>(k, parts[2])};
       }},
      {"folds", [](RunConfig& c, const auto& k, const auto& v) { c.folds = number<std::size_t>(k, v); }},
      {"layers",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.model.extractor.active_layers = rethrow_as(k, [&] { return parse_layer_set(v); });
       }},
      {"distance",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.model.distance = rethrow_as(k, [&] { return parse_distance_mode(v); });
       }},
      {"hidden", [](RunConfig& c, const auto& k, const auto& v) { c.model.hidden = positive(k, v); }},
      {"head",
       [](RunConfig& c, const auto& k, const auto& v) {
         if (v == "gap") {
           c.model.extractor.head = FeatureHead::kGap;
         } else if (v == "flatten") {
           c.model.extractor.head = FeatureHead::kFlatten;
         } else {
           throw ConfigError("key '" + k + "' expects gap or flatten", k);
         }
       }},
      {"lr", [](RunConfig& c, const auto& k, const auto& v) { c.hyper.learning_rate = number<double>(k, v); }},
      {"epochs", [](RunConfig& c, const auto& k, const auto& v) { c.hyper.epochs = positive(k, v); }},
      {"batch_size", [](RunConfig& c, const auto& k, const auto& v) { c.hyper.batch_size = positive(k, v); }},
      {"keep_best", [](RunConfig& c, const auto& k, const auto& v) { c.hyper.keep_best_validation = boolean(k, v); }},
      {"lr_grid",
       [](RunConfig& c, const auto& k, const auto& v) {
         std::vector<double> grid;
         for (const auto& p : split_list(v)) grid.push_back(number<double>(k, p));
         c.lr_grid = grid;
       }},
      {"layer_sets",
       [](RunConfig& c, const auto& k, const auto& v) {
         std::vector<std::vector<int>> sets;
         for (const auto& p : split_list(v)) sets.push_back(rethrow_as(k, [&] { return parse_layer_set(p); }));
         c.layer_sets = sets;
       }},
  };
  return table;
}

}  // namespace

HeatmapOptions RunConfig::heatmap_options() const {
  HeatmapOptions o = data.heatmap;
  o.sigma_px = sigma.value_or(static_cast<double>(o.width) / 16.0);
  return o;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m = model;
  m.grid_height = data.heatmap.height;
  m.grid_width = data.heatmap.width;
  m.extractor.in_channels = data.merge_channels ? 1 : static_cast<std::size_t>(kStimulusCount);
  m.init_seed = stream_seed(seed, SeedStream::kInit);
  return m;
}

Hyperparams RunConfig::hyperparams() const {
  Hyperparams h = hyper;
  h.seed = stream_seed(seed, SeedStream::kOrder);
  return h;
}

std::string RunConfig::to_text() const {
  const auto& co = data.cohort;
  const auto& ex = model.extractor;
  std::string layer_sets_text;
  for (std::size_t i = 0; i < layer_sets.size(); ++i) {
    layer_sets_text += (i ? "," : "") + layer_set_name(layer_sets[i]);
  }
  std::ostringstream o;
  o << "seed = " << seed << '\n'
    << "out = " << out << '\n'
    << "n_ad = " << data.n_ad << '\n'
    << "n_normal = " << data.n_normal << '\n'
    << "refs = " << data.references << '\n'
    << "adherence_ad = " << fmt(co.ad.adherence) << '\n'
    << "adherence_normal = " << fmt(co.normal.adherence) << '\n'
    << "dispersion_ad = " << fmt(co.ad.dispersion) << '\n'
    << "dispersion_normal = " << fmt(co.normal.dispersion) << '\n'
    << "adherence_jitter = " << fmt(co.adherence_jitter) << '\n'
    << "min_fixations = " << co.min_fixations << '\n'
    << "max_fixations = " << co.max_fixations << '\n'
    << "grid = " << data.heatmap.height << 'x' << data.heatmap.width << '\n'
    << "sigma = " << fmt(heatmap_options().sigma_px) << '\n'
    << "weighting = " << (data.heatmap.weighting == ImpulseWeighting::kDuration ? "duration" : "unit") << '\n'
    << "merge = " << (data.merge_channels ? "true" : "false") << '\n'
    << "split = " << split_mode_name(split) << '\n'
    << "ratios = " << join_doubles({ratios.train, ratios.validation, ratios.test}) << '\n'
    << "folds = " << folds << '\n'
    << "layers = " << layer_set_name(ex.active_layers) << '\n'
    << "distance = " << distance_mode_name(model.distance) << '\n'
    << "hidden = " << model.hidden << '\n'
    << "head = " << (ex.head == FeatureHead::kGap ? "gap" : "flatten") << '\n'
    << "lr = " << fmt(hyper.learning_rate) << '\n'
    << "epochs = " << hyper.epochs << '\n'
    << "batch_size = " << hyper.batch_size << '\n'
    << "keep_best = " << (hyper.keep_best_validation ? "true" : "false") << '\n'
    << "lr_grid = " << join_doubles(lr_grid) << '\n'
    << "layer_sets = " << layer_sets_text << '\n';
  return o.str();
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown configuration key '" + key + "'", key);
  it->second(config, key, value);
}

std::vector<std::pair<std::string, std::string>> parse_settings_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value, got '" + t + "'", t);
    }
    out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return out;
}

RunConfig parse_config(const ConfigSources& sources) {
  RunConfig config;
  if (sources.env_seed && !sources.env_seed->empty()) {
    config.seed = number<std::uint64_t>("MCCNN_SEED", *sources.env_seed);
  }
  if (sources.file) {
    std::ifstream in(*sources.file);
    if (!in) throw ConfigError("cannot read config file " + *sources.file, "config");
    std::stringstream buf;
    buf << in.rdbuf();
    for (const auto& [k, v] : parse_settings_text(buf.str())) apply_setting(config, k, v);
  }
  for (const auto& [k, v] : sources.flags) apply_setting(config, k, v);

  // Whole-config checks, each attributed to the key that controls it.
  rethrow_as("ratios", [&] { config.ratios.validate(); });
  rethrow_as("grid", [&] { config.heatmap_options().validate(); });
  if (config.data.cohort.ad.adherence < 0 || config.data.cohort.ad.adherence > 1) {
    throw ConfigError("adherence must lie in [0, 1]", "adherence_ad");
  }
  if (config.data.cohort.normal.adherence < 0 || config.data.cohort.normal.adherence > 1) {
    throw ConfigError("adherence must lie in [0, 1]", "adherence_normal");
  }
  if (!(config.data.cohort.ad.dispersion >= 0)) throw ConfigError("dispersion must be >= 0", "dispersion_ad");
  if (!(config.data.cohort.normal.dispersion >= 0)) {
    throw ConfigError("dispersion must be >= 0", "dispersion_normal");
  }
  if (config.data.cohort.min_fixations < 1) throw ConfigError("min_fixations must be >= 1", "min_fixations");
  if (config.data.cohort.max_fixations < config.data.cohort.min_fixations) {
    throw ConfigError("max_fixations must be >= min_fixations", "max_fixations");
  }
  if (config.data.n_ad < 0) throw ConfigError("n_ad must be >= 0", "n_ad");
  if (config.data.n_normal < 0) throw ConfigError("n_normal must be >= 0", "n_normal");
  config.data.cohort.validate();
  rethrow_as("refs", [&] { config.data.validate(); });
  rethrow_as("layers", [&] { config.model_config().validate(); });
  for (const auto& set : config.layer_sets) rethrow_as("layer_sets", [&] { validate_hierarchical_layer_set(set); });
  for (double lr : config.lr_grid) {
    if (!(lr > 0.0)) throw ConfigError("lr_grid entries must be > 0", "lr_grid");
  }
  if (config.lr_grid.empty()) throw ConfigError("lr_grid must not be empty", "lr_grid");
  if (config.folds < 2) throw ConfigError("folds must be >= 2", "folds");
  config.hyperparams().validate();
  return config;
}

}  // namespace mccnn::app
