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

// Synthetic benchmark construction and the experiment drivers built on top of
// train(): learning-rate sweep, layer-combination study, module ablation and
// k-fold cross-validation.
//
// Every random choice draws from its own stream derived from one global seed,
// so changing e.g. the reference group size never perturbs the gaze data.

#ifndef MCCNN_EXPERIMENTS_HPP_
#define MCCNN_EXPERIMENTS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mccnn/dataset.hpp"
#include "mccnn/gaze_synth.hpp"
#include "mccnn/heatmap.hpp"
#include "mccnn/metrics.hpp"
#include "mccnn/model.hpp"
#include "mccnn/training.hpp"

namespace mccnn {

enum class SeedStream : std::uint64_t {
  kStimuli = 1,
  kCohort = 2,
  kReferences = 3,
  kSplit = 4,
  kInit = 5,
  kOrder = 6,
  kFolds = 7,
};

std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream);

struct BenchmarkConfig {
  int n_ad = 38;
  int n_normal = 68;
  std::size_t references = 30;
  CohortConfig cohort;
  HeatmapOptions heatmap = HeatmapOptions::for_grid(32, 32);
  /// Collapse the 9 channels into one averaged map.
  bool merge_channels = false;

  void validate() const;
};

struct SyntheticCohort {
  std::vector<StimulusSpec> stimuli;
  std::vector<SubjectProfile> profiles;
  std::vector<FixationSession> sessions;  // sorted by subject id
};

SyntheticCohort synthesize_cohort(const BenchmarkConfig& config, std::uint64_t seed);

/// One stack per session, keyed by subject id.
std::map<int, StackPtr> render_stacks(const std::vector<FixationSession>& sessions,
                                      const HeatmapOptions& options, bool merge = false);

struct PairedDataset {
  ReferenceSelection selection;
  std::vector<Combination> combinations;
};

/// Picks the reference group among the NORMAL stacks and pairs every other
/// subject with it.
PairedDataset pair_cohort(const std::map<int, StackPtr>& stacks, std::size_t references, std::uint64_t seed);

struct Benchmark {
  SyntheticCohort cohort;
  std::map<int, StackPtr> stacks;
  PairedDataset paired;
  DatasetSplit split;
};

Benchmark build_benchmark(const BenchmarkConfig& config, const SplitRatios& ratios, SplitMode mode,
                          std::uint64_t seed);

/// The per-subject view of a pair split: one sample per unknown subject with
/// a null reference, partitions preserved.
DatasetSplit single_branch_split(const DatasetSplit& pairs);

struct RunResult {
  Model model;
  TrainReport report;
};

/// Fresh model from `model_config`, trained on `split`.
RunResult run_training(const DatasetSplit& split, const ModelConfig& model_config, const Hyperparams& hyper);

// ---- Learning-rate sweep

std::vector<double> default_lr_grid();

struct SweepRow {
  double learning_rate = 0.0;
  Evaluation test;
};

/// One run per learning rate from the same initial weights and data order.
/// ConfigError("lr") for an empty grid or a non-positive entry.
std::vector<SweepRow> lr_sweep(const std::vector<double>& grid, const DatasetSplit& split,
                               const ModelConfig& model_config, const Hyperparams& hyper);

// ---- Layer-combination study and module ablation

std::vector<std::vector<int>> default_layer_sets();

struct AblationRow {
  std::string name;  // "Layer012", "Model3", ...
  std::size_t parameters = 0;
  std::size_t distance_length = 0;
  Evaluation test;
};

/// Copy of `base` restricted to `layers`; validates the hierarchy rule.
ModelConfig layer_variant(const ModelConfig& base, const std::vector<int>& layers);

std::vector<AblationRow> layer_ablation(const std::vector<std::vector<int>>& layer_sets,
                                        const DatasetSplit& split, const ModelConfig& base,
                                        const Hyperparams& hyper);

/// Model1: single stack, group label. Model2: layer 4 only. Model3: flatten +
/// fully connected vectors instead of pooling. Model4: the full network.
ModelConfig module_variant(const ModelConfig& base, int index);

/// Rows Model1..Model4. Model1 trains on single_branch_split(split).
std::vector<AblationRow> module_ablation(const DatasetSplit& split, const ModelConfig& base,
                                         const Hyperparams& hyper);

// ---- Cross-validation

struct FoldScores {
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
  double test_accuracy = 0.0;
  MetricsRecord test_metrics;
};

struct CrossValidation {
  std::vector<FoldScores> folds;
  FoldScores mean;
  FoldScores stddev;  // sample standard deviation (n - 1)
};

/// k folds over `combos`. Inside each fold the training part is split again,
/// 3:1, into train and validation with the same split mode. Each fold starts
/// from its own seeded initialization.
CrossValidation cross_validate(const std::vector<Combination>& combos, std::size_t k, SplitMode mode,
                               const ModelConfig& model_config, const Hyperparams& hyper,
                               std::uint64_t seed);

/// Flattens fold scores into metrics-table rows (folds, then "mean", "std").
std::vector<MetricsRow> cross_validation_rows(const std::string& model, const CrossValidation& cv);

}  // namespace mccnn

#endif  // MCCNN_EXPERIMENTS_HPP_
