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

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "mccnn/error.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--seed", "seed", "global seed (default 42, or MCCNN_SEED)"},
    {"--out", "out", "output directory"},
    {"--lr", "lr", "learning rate"},
    {"--epochs", "epochs", "training epochs"},
    {"--grid", "grid", "heatmap grid as HxW"},
    {"--refs", "refs", "reference group size"},
    {"--split", "split", "split mode: subject or paper"},
    {"--distance", "distance", "distance mode: absdiff, l2 or cosine"},
    {"--layers", "layers", "active extractor layers, e.g. 01234"},
};

const std::map<std::string, std::string> kCommandHelp{
    {"synth", "simulate fixation sessions for a synthetic cohort"},
    {"heatmaps", "render one heatmap stack per subject"},
    {"dataset", "pair subjects with the reference group and split"},
    {"train", "train a model on the dataset"},
    {"eval", "score the trained model on the test partition"},
    {"sweep-lr", "train once per learning rate in lr_grid"},
    {"ablate-layers", "train once per active layer set"},
    {"ablate-modules", "train the four module variants"},
    {"xval", "k-fold cross-validation"},
    {"repro", "run every stage above in order"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-layer comparison CNN for gaze heatmap pairs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> settings;
  std::vector<std::string> flag_values(std::size(kFlags));
  std::vector<CLI::Option*> flag_options;

  for (const auto& name : mccnn::app::command_names()) {
    auto* sub = app.add_subcommand(name, kCommandHelp.at(name));
    sub->fallthrough();
  }
  app.add_option("--config", config_path, "key = value configuration file");
  for (std::size_t i = 0; i < std::size(kFlags); ++i) {
    flag_options.push_back(app.add_option(kFlags[i].flag, flag_values[i], kFlags[i].help));
  }
  app.add_option("--set", settings, "extra key=value setting (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    mccnn::app::ConfigSources sources;
    if (!config_path.empty()) sources.file = config_path;
    if (const char* env = std::getenv("MCCNN_SEED")) sources.env_seed = env;
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw mccnn::ConfigError("--set expects key=value, got '" + s + "'", s);
      sources.flags.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    for (std::size_t i = 0; i < std::size(kFlags); ++i) {
      if (flag_options[i]->count() > 0) sources.flags.emplace_back(kFlags[i].key, flag_values[i]);
    }
    const auto config = mccnn::app::parse_config(sources);
    const std::string command = app.get_subcommands().front()->get_name();
    mccnn::app::run_command(command, config, std::cout);
  } catch (const mccnn::ConfigError& e) {
    std::cerr << "config error [" << e.key() << "]: " << e.what() << '\n';
    return 2;
  } catch (const mccnn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
