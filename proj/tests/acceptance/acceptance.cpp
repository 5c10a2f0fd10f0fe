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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Pass criterion numbers as arguments to run a
// subset, e.g. `mccnn_acceptance 1 2 7`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "mccnn/checkpoint.hpp"
#include "mccnn/error.hpp"
#include "mccnn/experiments.hpp"
#include "mccnn/ops.hpp"
#include "mccnn/stack_io.hpp"
#include "oracles.hpp"

using namespace mccnn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- 1. gradient oracle

StackPtr random_stack(int subject, Group group, std::size_t channels, std::size_t h, std::size_t w,
                      std::mt19937_64& rng) {
  auto s = std::make_shared<HeatmapStack>();
  s->subject_id = subject;
  s->group = group;
  s->channels = channels;
  s->height = h;
  s->width = w;
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (std::size_t i = 0; i < channels * h * w; ++i) s->values.push_back(u(rng));
  return s;
}

ModelConfig tiny_config(int index, std::mt19937_64& rng) {
  ModelConfig c;
  c.extractor.in_channels = 1 + rng() % 3;
  for (auto& ch : c.extractor.channels) ch = 2 + rng() % 3;
  const std::vector<std::vector<int>> sets{{0}, {0, 1}, {0, 1, 2}, {0, 1, 2, 3}, {0, 1, 2, 3, 4}, {0, 2, 4}, {3}};
  c.extractor.active_layers = sets[static_cast<std::size_t>(index) % sets.size()];
  c.extractor.head = index % 3 == 2 ? FeatureHead::kFlatten : FeatureHead::kGap;
  c.distance = static_cast<DistanceMode>(index % 3);
  c.branching = index % 5 == 4 ? Branching::kSingle : Branching::kPairwise;
  const std::size_t grid = 8 + 2 * (rng() % 3);
  c.grid_height = grid;
  c.grid_width = grid + 2 * (rng() % 2);
  c.hidden = 3 + rng() % 4;
  c.init_seed = rng();
  return c;
}

// Relative errors below this absolute gradient size are measured against
// the floor instead of the (tiny) gradient itself.
constexpr double kGradientFloor = 1e-6;

Outcome gradient_oracle() {
  std::mt19937_64 rng(20260101);
  double worst = 0.0;
  std::size_t checked = 0;
  const int configs = 24;
  for (int index = 0; index < configs; ++index) {
    const ModelConfig c = tiny_config(index, rng);
    Model model(c);
    const auto u = random_stack(0, index % 2 ? Group::kAd : Group::kNormal, c.extractor.in_channels,
                                c.grid_height, c.grid_width, rng);
    const auto r = random_stack(1, Group::kNormal, c.extractor.in_channels, c.grid_height, c.grid_width, rng);
    const int label = index % 2 ? kLabelAd : kLabelNormal;
    const bool single = c.branching == Branching::kSingle;
    auto loss = [&] {
      const auto fu = extract_features(stack_to_tensor(*u), model);
      const Prediction p = single ? predict_single(fu, model)
                                  : predict_pair(fu, extract_features(stack_to_tensor(*r), model), model);
      return bce_loss(slice(p.probabilities, 1, 1), label);
    };
    auto named = model.named_parameters();
    // Zero-initialized biases put dead units exactly on ReLU kinks (and zero
    // vectors on the cosine singularity), where central differences and the
    // subgradient disagree. Random biases move the check to a generic point.
    std::uniform_real_distribution<double> bias(-0.2, 0.2);
    for (auto& [name, t] : named) {
      if (name.ends_with(".bias")) {
        for (auto& v : t.mutable_data()) v = bias(rng);
      }
      t.zero_grad();
    }
    loss().backward();
    for (auto& [name, t] : named) {
      const std::vector<double> analytic(t.grad().begin(), t.grad().end());
      auto values = t.mutable_data();
      const auto numeric = oracle::finite_difference(
          [&] {
            NoGradGuard g;
            return loss().item();
          },
          values.data(), values.size());
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i], kGradientFloor));
      }
      checked += numeric.size();
    }
  }
  return {worst < 1e-4, std::to_string(configs) + " configs, " + std::to_string(checked) +
                            " parameters, max relative error " + fmt("%.3g", worst)};
}

// ---- 2. counts

Outcome counts() {
  std::vector<StackPtr> ad, normal, refs;
  int id = 0;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 38; ++i) ad.push_back(random_stack(id++, Group::kAd, 9, 8, 8, rng));
  for (int i = 0; i < 38; ++i) normal.push_back(random_stack(id++, Group::kNormal, 9, 8, 8, rng));
  for (int i = 0; i < 30; ++i) refs.push_back(random_stack(id++, Group::kNormal, 9, 8, 8, rng));
  const auto combos = build_combinations(ad, normal, refs);
  auto per_label = [](const std::vector<Combination>& v, int label) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](auto& c) { return c.label() == label; }));
  };
  bool ok = combos.size() == 2280 && per_label(combos, kLabelAd) == 1140 && per_label(combos, kLabelNormal) == 1140;
  std::string detail = std::to_string(combos.size()) + " combinations";
  for (SplitMode mode : {SplitMode::kCombination, SplitMode::kSubject}) {
    const auto split = split_dataset(combos, SplitRatios{}, mode, 42);
    for (int label : {kLabelAd, kLabelNormal}) {
      const auto tr = per_label(split.train, label), va = per_label(split.validation, label),
                 te = per_label(split.test, label);
      ok = ok && tr == 660 && va == 240 && te == 240;
      if (label == kLabelAd) {
        detail += "; " + std::string(split_mode_name(mode)) + " " + std::to_string(tr) + "/" + std::to_string(va) +
                  "/" + std::to_string(te) + " per class";
      }
    }
  }
  return {ok, detail};
}

// ---- 3-6. synthetic benchmark runs

const std::vector<std::uint64_t> kSeeds{42, 43, 44};

struct SeedRuns {
  Benchmark bench;
  ModelConfig base;
  Hyperparams hyper;
  RunResult main;
};

std::map<std::uint64_t, SeedRuns>& seed_runs() {
  static std::map<std::uint64_t, SeedRuns> runs;
  return runs;
}

const SeedRuns& runs_for(std::uint64_t seed) {
  auto& runs = seed_runs();
  auto it = runs.find(seed);
  if (it != runs.end()) return it->second;
  const auto start = std::chrono::steady_clock::now();
  Benchmark bench = build_benchmark(BenchmarkConfig{}, SplitRatios{}, SplitMode::kSubject, seed);
  ModelConfig base;
  base.init_seed = stream_seed(seed, SeedStream::kInit);
  Hyperparams hyper;
  hyper.seed = stream_seed(seed, SeedStream::kOrder);
  RunResult main = run_training(bench.split, base, hyper);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("  seed %llu: test accuracy %.4f, subject accuracy %.4f, loss %.4f -> %.4f (%.0f s)\n",
              static_cast<unsigned long long>(seed), main.report.test->metrics.accuracy,
              main.report.test->subject_metrics.accuracy, main.report.epochs.front().train_loss,
              main.report.epochs.back().train_loss, secs);
  std::fflush(stdout);
  return runs.emplace(seed, SeedRuns{std::move(bench), base, hyper, std::move(main)}).first->second;
}

Outcome separability() {
  int passed = 0;
  std::string detail;
  for (auto seed : kSeeds) {
    const auto& r = runs_for(seed).main.report;
    const double acc = r.test->metrics.accuracy, subj = r.test->subject_metrics.accuracy;
    if (acc >= 0.90 && subj >= 0.90) ++passed;
    detail += (detail.empty() ? "" : "; ") + std::to_string(seed) + ": " + fmt("%.4f", acc) + "/" + fmt("%.4f", subj);
  }
  return {passed == 3, std::to_string(passed) + "/3 seeds, combination/subject test accuracy " + detail};
}

Outcome convergence() {
  bool ok = true;
  std::string detail;
  for (auto seed : kSeeds) {
    const auto& e = runs_for(seed).main.report.epochs;
    const double first = e.front().train_loss, last = e.back().train_loss;
    ok = ok && last < 0.5 * first;
    detail += (detail.empty() ? "" : "; ") + std::to_string(seed) + ": " + fmt("%.4f", first) + " -> " +
              fmt("%.4f", last);
  }
  return {ok, "train loss first -> final epoch " + detail};
}

Outcome layer_trend() {
  const auto sets = default_layer_sets();
  std::vector<double> mean(sets.size(), 0.0);
  for (auto seed : kSeeds) {
    const auto& runs = runs_for(seed);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      double acc;
      if (sets[i] == runs.base.extractor.active_layers) {
        acc = runs.main.report.test->metrics.accuracy;
      } else {
        const auto r = run_training(runs.bench.split, layer_variant(runs.base, sets[i]), runs.hyper);
        acc = r.report.test->metrics.accuracy;
      }
      mean[i] += acc / static_cast<double>(kSeeds.size());
    }
  }
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (i > 0 && mean[i] < mean[i - 1] - 0.02) ok = false;
    detail += (i ? ", " : "") + std::string("Layer") + layer_set_name(sets[i]) + " " + fmt("%.4f", mean[i]);
  }
  return {ok, "mean test accuracy " + detail};
}

Outcome module_sanity() {
  std::map<int, double> mean;
  for (auto seed : kSeeds) {
    const auto& runs = runs_for(seed);
    for (int index = 1; index <= 4; ++index) {
      double acc;
      if (index == 4) {
        acc = runs.main.report.test->metrics.accuracy;
      } else {
        const ModelConfig variant = module_variant(runs.base, index);
        const DatasetSplit split = index == 1 ? single_branch_split(runs.bench.split) : runs.bench.split;
        acc = run_training(split, variant, runs.hyper).report.test->metrics.accuracy;
      }
      mean[index] += acc / static_cast<double>(kSeeds.size());
    }
  }
  // Model4 must not trail Model2 or Model3; one inversion of at most 0.01 is
  // tolerated.
  int inversions = 0;
  bool ok = true;
  for (int other : {2, 3}) {
    const double gap = mean[other] - mean[4];
    if (gap > 0.0) {
      ++inversions;
      if (gap > 0.01) ok = false;
    }
  }
  ok = ok && inversions <= 1;
  std::string detail;
  for (int index = 1; index <= 4; ++index) {
    detail += (index > 1 ? ", " : "") + std::string("Model") + std::to_string(index) + " " + fmt("%.4f", mean[index]);
  }
  return {ok, "mean test accuracy " + detail};
}

// ---- 7. metric oracle

Outcome metric_oracle() {
  std::mt19937_64 rng(7);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 64;
    std::vector<int> p(n), l(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng() % 2);
      l[i] = static_cast<int>(rng() % 2);
    }
    const auto want = oracle::enumerate(p, l);
    const auto cm = confusion(p, l);
    const auto m = metrics(cm);
    bool ok = cm.tp == want.tp && cm.fp == want.fp && cm.tn == want.tn && cm.fn == want.fn;
    const double total = static_cast<double>(n);
    ok = ok && m.accuracy == static_cast<double>(want.tp + want.tn) / total;
    if (want.tp + want.fn > 0) {
      ok = ok && m.recall && *m.recall == static_cast<double>(want.tp) / static_cast<double>(want.tp + want.fn);
    } else {
      ok = ok && !m.recall;
    }
    if (want.tp + want.fp > 0) {
      ok = ok && m.precision && *m.precision == static_cast<double>(want.tp) / static_cast<double>(want.tp + want.fp);
    } else {
      ok = ok && !m.precision;
    }
    if (ok) ++exact;
  }
  const auto f1 = f1_score(0.90, 0.74);
  const bool f1_ok = f1 && std::abs(*f1 - 0.81) <= 0.005;
  return {exact == 100 && f1_ok,
          std::to_string(exact) + "/100 exact; F1(P=0.90, R=0.74) = " + (f1 ? fmt("%.4f", *f1) : "NA")};
}

// ---- 8. determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
  }
  return files;
}

// Runs the whole pipeline twice into the same directory (the echoed config
// names the output directory) and compares every file.
Outcome determinism() {
  const auto root = fs::temp_directory_path() / "mccnn_acceptance_determinism";
  app::ConfigSources src;
  src.flags = {{"seed", "7"}, {"out", root.string()}, {"n_ad", "6"},  {"n_normal", "10"},
               {"refs", "4"}, {"grid", "16x16"},       {"epochs", "3"}, {"hidden", "8"}};
  const app::RunConfig config = app::parse_config(src);
  std::ostringstream log;
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(root);
    app::run_command("repro", config, log);
    runs.push_back(snapshot(root));
  }
  fs::remove_all(root);
  const auto& first = runs[0];
  std::size_t same = 0;
  for (const auto& [path, bytes] : first) {
    const auto it = runs[1].find(path);
    if (it != runs[1].end() && it->second == bytes) ++same;
  }
  const bool has_all = first.count("train/model.ckpt") && first.count("train/report.txt") &&
                       first.count("eval/metrics.csv") && first.count("MANIFEST");
  const bool ok = has_all && same == first.size() && first.size() == runs[1].size();
  return {ok, std::to_string(same) + "/" + std::to_string(first.size()) +
                  " files byte-identical across two seeded pipeline runs"};
}

// ---- 9. format round trips

template <typename Decode>
bool rejects_at(const std::vector<std::byte>& bytes, std::uint64_t offset, Decode decode) {
  try {
    decode(bytes);
  } catch (const FormatError& e) {
    return e.offset() == offset;
  }
  return false;
}

Outcome round_trips() {
  std::mt19937_64 rng(9);
  bool ok = true;
  int corruptions = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = random_stack(trial, Group::kNormal, 9, 16 + 4 * static_cast<std::size_t>(trial), 32, rng);
    const auto bytes = encode_stack(*s);
    const auto back = decode_stack(bytes);
    ok = ok && back.channels == s->channels && back.height == s->height && back.width == s->width &&
         std::memcmp(back.values.data(), s->values.data(), s->values.size() * sizeof(float)) == 0;
  }
  for (int variant = 1; variant <= 4; ++variant) {
    ModelConfig c = module_variant(ModelConfig{}, variant);
    c.init_seed = rng();
    const Model m(c);
    ok = ok && encode_checkpoint(decode_checkpoint(encode_checkpoint(m))) == encode_checkpoint(m);
  }

  auto decode_s = [](const std::vector<std::byte>& b) { decode_stack(b); };
  auto decode_c = [](const std::vector<std::byte>& b) { decode_checkpoint(b); };
  const auto stack = encode_stack(*random_stack(0, Group::kAd, 9, 32, 32, rng));
  const auto ckpt = encode_checkpoint(Model(ModelConfig{}));
  auto corrupt = [](std::vector<std::byte> b, std::size_t at, std::byte v) {
    b[at] = v;
    return b;
  };
  const std::vector<std::pair<bool, const char*>> cases{
      {rejects_at(corrupt(stack, 0, std::byte{'Z'}), 0, decode_s), "stack magic"},
      {rejects_at(corrupt(stack, 4, std::byte{7}), 4, decode_s), "stack version"},
      {rejects_at(corrupt(stack, 8, std::byte{0}), 8, decode_s), "stack dims"},
      {rejects_at(corrupt(stack, 64, std::byte{0x3F}), stack.size() - 8, decode_s), "stack checksum"},
      {rejects_at(corrupt(ckpt, 2, std::byte{'Z'}), 0, decode_c), "checkpoint magic"},
      {rejects_at(corrupt(ckpt, 4, std::byte{2}), 4, decode_c), "checkpoint version"},
      {rejects_at(corrupt(ckpt, 11, std::byte{0x40}), 8, decode_c), "checkpoint config length"},
  };
  std::string failed;
  for (const auto& [pass, name] : cases) {
    ++corruptions;
    if (!pass) failed += std::string(" ") + name;
  }
  ok = ok && failed.empty();
  return {ok, "5 stacks and 4 checkpoints bit-exact; " + std::to_string(corruptions) +
                  " corrupted headers rejected at their offsets" + (failed.empty() ? "" : "; wrong:" + failed)};
}

// ---- 10. GAP parameters

Outcome gap_parameters() {
  const ModelConfig base;
  const auto model4 = param_count(Model(module_variant(base, 4)), true);
  const auto model3 = param_count(Model(module_variant(base, 3)), true);
  const bool ok = model4.of("gap") == 0 && model3.of("gap") == 0 && model3.total > model4.total;
  return {ok, "GAP " + std::to_string(model4.of("gap")) + " parameters; Model3 " + std::to_string(model3.total) +
                  " > Model4 " + std::to_string(model4.total)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, gradient_oracle}, {2, counts},          {3, separability}, {4, convergence},  {5, layer_trend},
      {6, module_sanity},   {7, metric_oracle},   {8, determinism},  {9, round_trips},  {10, gap_parameters},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& [number, check] : criteria) {
    if (!selected.empty() && !selected.count(number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failures;
    std::printf("criterion %2d: %s  %s (%.1f s)\n", number, outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
