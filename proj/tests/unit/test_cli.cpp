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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "mccnn/error.hpp"

using namespace mccnn;
using namespace mccnn::app;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mccnn_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

// A cohort small enough for a few seconds of training.
RunConfig small_config(const fs::path& out, std::uint64_t seed = 7) {
  ConfigSources src;
  src.flags = {{"seed", std::to_string(seed)}, {"out", out.string()}, {"n_ad", "6"},  {"n_normal", "10"},
               {"refs", "4"},                  {"grid", "16x16"},    {"epochs", "2"}, {"hidden", "8"}};
  return parse_config(src);
}

// Writes `text` to a temp file and returns its path.
std::string config_file(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / ("mccnn_cli_" + name + ".cfg");
  std::ofstream(path) << text;
  return path.string();
}

std::string config_key_of(const ConfigSources& src) {
  try {
    parse_config(src);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c = parse_config(ConfigSources{});
  CHECK(c.hyper.learning_rate == 1e-3);
  CHECK(c.hyper.epochs == 50);
  CHECK(c.hyper.batch_size == 16);
  CHECK(c.data.heatmap.height == 32);
  CHECK(c.data.heatmap.width == 32);
  CHECK(c.data.references == 30);
  CHECK(c.seed == 42);
  CHECK(c.data.n_ad == 38);
  CHECK(c.data.n_normal == 68);
  CHECK(c.split == SplitMode::kSubject);
  CHECK(c.heatmap_options().sigma_px == 2.0);
  CHECK(c.model_config().grid_height == 32);
}

TEST_CASE("precedence") {
  ConfigSources src;
  src.file = config_file("precedence", "# tuned\nlr = 1e-3\nepochs = 7\nseed = 5\n");
  src.flags = {{"lr", "1e-4"}};
  src.env_seed = "9";
  const RunConfig c = parse_config(src);
  CHECK(c.hyper.learning_rate == 1e-4);
  CHECK(c.hyper.epochs == 7);
  CHECK(c.seed == 5);  // the file beats the environment

  ConfigSources env_only;
  env_only.env_seed = "9";
  CHECK(parse_config(env_only).seed == 9);

  ConfigSources flag_seed = src;
  flag_seed.flags.emplace_back("seed", "11");
  CHECK(parse_config(flag_seed).seed == 11);
}

TEST_CASE("config errors name the key") {
  ConfigSources src;
  src.file = config_file("unknown", "learnrate = 0.1\n");
  CHECK(config_key_of(src) == "learnrate");

  src = ConfigSources{};
  src.flags = {{"epochs", "many"}};
  CHECK(config_key_of(src) == "epochs");

  src = ConfigSources{};
  src.flags = {{"ratios", "0.5,0.2,0.2"}};
  CHECK(config_key_of(src) == "ratios");

  src = ConfigSources{};
  src.flags = {{"grid", "32"}};
  CHECK(config_key_of(src) == "grid");

  src = ConfigSources{};
  src.flags = {{"split", "random"}};
  CHECK(config_key_of(src) == "split");

  src = ConfigSources{};
  src.flags = {{"refs", "80"}};
  CHECK(config_key_of(src) == "refs");

  src = ConfigSources{};
  src.env_seed = "abc";
  CHECK_FALSE(config_key_of(src).empty());

  src = ConfigSources{};
  src.file = (fs::temp_directory_path() / "mccnn_cli_absent.cfg").string();
  CHECK_THROWS(parse_config(src));
}

TEST_CASE("config text echoes back") {
  ConfigSources src;
  src.flags = {{"lr", "0.01"}, {"layers", "012"}, {"distance", "l2"}, {"split", "paper"}};
  const RunConfig c = parse_config(src);
  ConfigSources again;
  again.file = config_file("echo", c.to_text());
  CHECK(parse_config(again).to_text() == c.to_text());
  CHECK(parse_settings_text("a = 1 # trailing\n\n# whole line\nb=2").size() == 2);
}

TEST_CASE("synth is byte-identical across runs") {
  const auto a = fresh_dir("synth_a"), b = fresh_dir("synth_b");
  std::ostringstream log;
  run_command("synth", small_config(a), log);
  run_command("synth", small_config(b), log);
  CHECK(slurp(a / "fixations.csv") == slurp(b / "fixations.csv"));
  CHECK_FALSE(slurp(a / "fixations.csv").empty());
  CHECK(slurp(a / "MANIFEST") == slurp(b / "MANIFEST"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("missing upstream artifacts") {
  const auto dir = fresh_dir("missing");
  std::ostringstream log;
  const RunConfig c = small_config(dir);
  try {
    run_command("eval", c, log);
    FAIL("expected a usage error");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("model.ckpt") != std::string::npos);
  }
  CHECK_THROWS_AS(run_command("heatmaps", c, log), UsageError);
  CHECK_THROWS_AS(run_command("frobnicate", c, log), UsageError);
  fs::remove_all(dir);
}

TEST_CASE("pipeline end to end") {
  const auto dir = fresh_dir("pipeline");
  std::ostringstream log;
  const RunConfig c = small_config(dir);
  for (const char* cmd : {"synth", "heatmaps", "dataset", "train", "eval"}) run_command(cmd, c, log);
  CHECK(fs::exists(dir / "stacks" / "subject_0000.hmst"));
  CHECK(fs::exists(dir / "dataset" / "manifest.csv"));
  CHECK(fs::exists(dir / "train" / "model.ckpt"));
  const std::string table = slurp(dir / "eval" / "metrics.csv");
  CHECK(table.rfind("model,fold,accuracy,recall,precision,f1\n", 0) == 0);
  CHECK(table.find("mccnn,") != std::string::npos);
  CHECK(slurp(dir / "train" / "report.txt").find("[config]") != std::string::npos);

  // Re-running a command reproduces its outputs byte for byte.
  const std::string report = slurp(dir / "train" / "report.txt");
  const std::string ckpt = slurp(dir / "train" / "model.ckpt");
  run_command("train", c, log);
  CHECK(slurp(dir / "train" / "report.txt") == report);
  CHECK(slurp(dir / "train" / "model.ckpt") == ckpt);

  const std::string manifest = slurp(dir / "MANIFEST");
  CHECK(manifest.find("train/model.ckpt") != std::string::npos);
  CHECK(manifest.find("fixations.csv") != std::string::npos);
  fs::remove_all(dir);
}
