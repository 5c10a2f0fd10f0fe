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

#include "mccnn/experiments.hpp"

#include <cmath>
#include <set>

#include "mccnn/error.hpp"
#include "mccnn/xxhash64.hpp"

namespace mccnn {

std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream) {
  return mix_seed(seed, static_cast<std::uint64_t>(stream));
}

void BenchmarkConfig::validate() const {
  if (n_ad < 0 || n_normal < 0) throw ConfigError("cohort sizes must be >= 0", "cohort");
  if (references == 0 || references >= static_cast<std::size_t>(n_normal)) {
    throw ConfigError("reference group must be non-empty and leave unknown normals", "refs");
  }
  cohort.validate();
  heatmap.validate();
}

SyntheticCohort synthesize_cohort(const BenchmarkConfig& config, std::uint64_t seed) {
  config.validate();
  SyntheticCohort out;
  out.stimuli = make_stimulus_set(stream_seed(seed, SeedStream::kStimuli));
  out.profiles = sample_cohort(config.n_ad, config.n_normal, config.cohort, stream_seed(seed, SeedStream::kCohort));
  out.sessions.reserve(out.profiles.size());
  for (const auto& p : out.profiles) out.sessions.push_back(simulate_session(p, out.stimuli));
  return out;
}

std::map<int, StackPtr> render_stacks(const std::vector<FixationSession>& sessions, const HeatmapOptions& options,
                                      bool merge) {
  std::map<int, StackPtr> stacks;
  for (const auto& s : sessions) {
    HeatmapStack stack = render_stack(s, options);
    if (merge) stack = merge_channels(stack);
    if (!stacks.emplace(s.subject_id, std::make_shared<const HeatmapStack>(std::move(stack))).second) {
      throw ValidationError("duplicate session for subject " + std::to_string(s.subject_id));
    }
  }
  return stacks;
}

PairedDataset pair_cohort(const std::map<int, StackPtr>& stacks, std::size_t references, std::uint64_t seed) {
  std::vector<int> normal_ids;
  std::vector<StackPtr> ad;
  for (const auto& [id, s] : stacks) {
    if (!s->group) throw ValidationError("stack of subject " + std::to_string(id) + " has no group");
    if (*s->group == Group::kNormal) {
      normal_ids.push_back(id);
    } else {
      ad.push_back(s);
    }
  }
  PairedDataset out;
  out.selection = select_reference_group(normal_ids, references, seed);
  std::vector<StackPtr> unknown_normal, refs;
  for (int id : out.selection.remaining) unknown_normal.push_back(stacks.at(id));
  for (int id : out.selection.references) refs.push_back(stacks.at(id));
  out.combinations = build_combinations(ad, unknown_normal, refs);
  return out;
}

Benchmark build_benchmark(const BenchmarkConfig& config, const SplitRatios& ratios, SplitMode mode,
                          std::uint64_t seed) {
  Benchmark b;
  b.cohort = synthesize_cohort(config, seed);
  b.stacks = render_stacks(b.cohort.sessions, config.heatmap, config.merge_channels);
  b.paired = pair_cohort(b.stacks, config.references, stream_seed(seed, SeedStream::kReferences));
  b.split = split_dataset(b.paired.combinations, ratios, mode, stream_seed(seed, SeedStream::kSplit));
  return b;
}

namespace {

std::vector<Combination> unique_unknowns(const std::vector<Combination>& pairs) {
  std::vector<Combination> out;
  std::set<int> seen;
  for (const auto& c : pairs) {
    if (seen.insert(c.unknown_subject()).second) out.push_back(Combination{c.unknown_subject(), c.unknown, nullptr});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

}  // namespace

DatasetSplit single_branch_split(const DatasetSplit& pairs) {
  DatasetSplit out;
  out.mode = pairs.mode;
  out.train = unique_unknowns(pairs.train);
  out.validation = unique_unknowns(pairs.validation);
  out.test = unique_unknowns(pairs.test);
  return out;
}

RunResult run_training(const DatasetSplit& split, const ModelConfig& model_config, const Hyperparams& hyper) {
  RunResult r{Model(model_config), {}};
  r.report = train(r.model, split, hyper);
  return r;
}

std::vector<double> default_lr_grid() { return {1e-5, 1e-4, 1e-3, 1e-2}; }

std::vector<SweepRow> lr_sweep(const std::vector<double>& grid, const DatasetSplit& split,
                               const ModelConfig& model_config, const Hyperparams& hyper) {
  if (grid.empty()) throw ConfigError("learning-rate grid is empty", "lr");
  for (double lr : grid) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("sweep learning rates must be > 0", "lr");
  }
  if (split.test.empty()) throw ConfigError("sweep needs a test partition", "ratios");
  std::vector<SweepRow> rows;
  for (double lr : grid) {
    Hyperparams h = hyper;
    h.learning_rate = lr;
    auto run = run_training(split, model_config, h);
    rows.push_back(SweepRow{lr, *run.report.test});
  }
  return rows;
}

std::vector<std::vector<int>> default_layer_sets() { return {{0, 1}, {0, 1, 2}, {0, 1, 2, 3}, {0, 1, 2, 3, 4}}; }

ModelConfig layer_variant(const ModelConfig& base, const std::vector<int>& layers) {
  validate_hierarchical_layer_set(layers);
  ModelConfig c = base;
  c.extractor.active_layers = layers;
  std::sort(c.extractor.active_layers.begin(), c.extractor.active_layers.end());
  c.validate();
  return c;
}

std::vector<AblationRow> layer_ablation(const std::vector<std::vector<int>>& layer_sets, const DatasetSplit& split,
                                        const ModelConfig& base, const Hyperparams& hyper) {
  if (split.test.empty()) throw ConfigError("layer study needs a test partition", "ratios");
  std::vector<ModelConfig> configs;
  for (const auto& set : layer_sets) configs.push_back(layer_variant(base, set));
  std::vector<AblationRow> rows;
  for (const auto& c : configs) {
    auto run = run_training(split, c, hyper);
    rows.push_back(AblationRow{"Layer" + layer_set_name(c.extractor.active_layers), param_count(run.model).total,
                               distance_length(c), *run.report.test});
  }
  return rows;
}

ModelConfig module_variant(const ModelConfig& base, int index) {
  ModelConfig c = base;
  switch (index) {
    case 1:
      c.branching = Branching::kSingle;
      break;
    case 2:
      c.extractor.active_layers = {4};
      break;
    case 3:
      c.extractor.head = FeatureHead::kFlatten;
      break;
    case 4:
      break;
    default:
      throw ConfigError("module ablation models are numbered 1 to 4", "model");
  }
  c.validate();
  return c;
}

std::vector<AblationRow> module_ablation(const DatasetSplit& split, const ModelConfig& base, const Hyperparams& hyper) {
  if (split.test.empty()) throw ConfigError("module ablation needs a test partition", "ratios");
  const DatasetSplit single = single_branch_split(split);
  std::vector<AblationRow> rows;
  for (int m = 1; m <= 4; ++m) {
    const ModelConfig c = module_variant(base, m);
    auto run = run_training(m == 1 ? single : split, c, hyper);
    rows.push_back(AblationRow{"Model" + std::to_string(m), param_count(run.model).total, distance_length(c),
                               *run.report.test});
  }
  return rows;
}

namespace {

std::vector<Combination> pick(const std::vector<Combination>& combos, const std::vector<std::size_t>& idx) {
  std::vector<Combination> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(combos[i]);
  return out;
}

// Mean and sample std of the defined values; undefined when any fold lacks one.
std::pair<std::optional<double>, std::optional<double>> summarize(const std::vector<std::optional<double>>& xs) {
  double sum = 0.0;
  for (const auto& x : xs) {
    if (!x) return {std::nullopt, std::nullopt};
    sum += *x;
  }
  const double n = static_cast<double>(xs.size());
  const double m = sum / n;
  if (xs.size() < 2) return {m, std::nullopt};
  double ss = 0.0;
  for (const auto& x : xs) ss += (*x - m) * (*x - m);
  return {m, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

CrossValidation cross_validate(const std::vector<Combination>& combos, std::size_t k, SplitMode mode,
                               const ModelConfig& model_config, const Hyperparams& hyper, std::uint64_t seed) {
  const auto folds = make_folds(combos, k, mode, stream_seed(seed, SeedStream::kFolds));
  CrossValidation cv;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto inner = pick(combos, folds[f].train);
    DatasetSplit split = split_dataset(inner, SplitRatios{0.75, 0.25, 0.0}, mode, mix_seed(seed, 100 + f));
    split.test = pick(combos, folds[f].test);
    ModelConfig mc = model_config;
    mc.init_seed = mix_seed(model_config.init_seed, f);
    Hyperparams h = hyper;
    h.seed = mix_seed(hyper.seed, f);
    auto run = run_training(split, mc, h);
    FoldScores s;
    s.train_accuracy = run.report.train->metrics.accuracy;
    s.validation_accuracy = run.report.validation ? run.report.validation->metrics.accuracy : 0.0;
    s.test_accuracy = run.report.test->metrics.accuracy;
    s.test_metrics = run.report.test->metrics;
    cv.folds.push_back(s);
  }

  auto column = [&](auto getter) {
    std::vector<std::optional<double>> xs;
    for (const auto& f : cv.folds) xs.push_back(getter(f));
    return summarize(xs);
  };
  auto assign = [&](auto getter, auto setter) {
    const auto [m, s] = column(getter);
    setter(cv.mean, m);
    setter(cv.stddev, s);
  };
  auto set_double = [](double FoldScores::*field) {
    return [field](FoldScores& f, std::optional<double> v) { f.*field = v.value_or(0.0); };
  };
  assign([](const FoldScores& f) { return std::optional<double>(f.train_accuracy); },
         set_double(&FoldScores::train_accuracy));
  assign([](const FoldScores& f) { return std::optional<double>(f.validation_accuracy); },
         set_double(&FoldScores::validation_accuracy));
  assign([](const FoldScores& f) { return std::optional<double>(f.test_accuracy); },
         set_double(&FoldScores::test_accuracy));
  cv.mean.test_metrics.accuracy = cv.mean.test_accuracy;
  cv.stddev.test_metrics.accuracy = cv.stddev.test_accuracy;
  assign([](const FoldScores& f) { return f.test_metrics.recall; },
         [](FoldScores& f, std::optional<double> v) { f.test_metrics.recall = v; });
  assign([](const FoldScores& f) { return f.test_metrics.precision; },
         [](FoldScores& f, std::optional<double> v) { f.test_metrics.precision = v; });
  assign([](const FoldScores& f) { return f.test_metrics.f1; },
         [](FoldScores& f, std::optional<double> v) { f.test_metrics.f1 = v; });
  return cv;
}

std::vector<MetricsRow> cross_validation_rows(const std::string& model, const CrossValidation& cv) {
  std::vector<MetricsRow> rows;
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    rows.push_back(MetricsRow{model, std::to_string(f + 1), cv.folds[f].test_metrics});
  }
  rows.push_back(MetricsRow{model, "mean", cv.mean.test_metrics});
  rows.push_back(MetricsRow{model, "std", cv.stddev.test_metrics});
  return rows;
}

}  // namespace mccnn
