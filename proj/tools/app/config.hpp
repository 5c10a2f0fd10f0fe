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

#ifndef MCCNN_TOOLS_CONFIG_HPP_
#define MCCNN_TOOLS_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mccnn/dataset.hpp"
#include "mccnn/experiments.hpp"
#include "mccnn/model.hpp"
#include "mccnn/training.hpp"

namespace mccnn::app {

/// Everything one invocation needs. Defaults reproduce the desk-scale
/// benchmark: 38 AD / 68 normal subjects, 30 references, 32x32 grid.
struct RunConfig {
  std::uint64_t seed = 42;
  std::string out = "mccnn_out";

  BenchmarkConfig data;
  /// Unset means width / 16.
  std::optional<double> sigma;
  SplitMode split = SplitMode::kSubject;
  SplitRatios ratios;
  std::size_t folds = 3;

  ModelConfig model;
  Hyperparams hyper;
  std::vector<double> lr_grid = default_lr_grid();
  std::vector<std::vector<int>> layer_sets = default_layer_sets();

  /// Heatmap options with the sigma rule applied.
  HeatmapOptions heatmap_options() const;
  /// Model config with grid, channel count and init seed filled in.
  ModelConfig model_config() const;
  /// Hyperparameters with the data-order seed filled in.
  Hyperparams hyperparams() const;

  /// Every key in the order parse_config accepts them; `key = value` lines.
  std::string to_text() const;
};

/// Applies one `key = value` setting. Throws ConfigError naming the key for
/// unknown keys and malformed or out-of-range values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

struct ConfigSources {
  std::optional<std::string> file;                          // key = value text file
  std::vector<std::pair<std::string, std::string>> flags;  // highest precedence
  std::optional<std::string> env_seed;                      // MCCNN_SEED
};

/// Defaults, then the environment seed, then the file, then flags; the
/// result is validated as a whole.
RunConfig parse_config(const ConfigSources& sources);

/// Parses `key = value` lines ('#' starts a comment).
std::vector<std::pair<std::string, std::string>> parse_settings_text(const std::string& text);

}  // namespace mccnn::app

#endif  // MCCNN_TOOLS_CONFIG_HPP_
