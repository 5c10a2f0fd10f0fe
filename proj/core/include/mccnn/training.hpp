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

// Mini-batch SGD on pair (or single-stack) binary cross-entropy, plus the
// no-gradient evaluation pass used for validation and test partitions.
//
// A Combination whose reference is null is a single-stack sample; it is only
// valid for Branching::kSingle models.

#ifndef MCCNN_TRAINING_HPP_
#define MCCNN_TRAINING_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mccnn/dataset.hpp"
#include "mccnn/metrics.hpp"
#include "mccnn/model.hpp"

namespace mccnn {

struct Hyperparams {
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  std::uint64_t seed = 42;  // data order
  /// Restore the weights of the epoch with the best validation accuracy.
  bool keep_best_validation = false;

  /// ConfigError for lr < 0 or non-finite, epochs == 0 or batch_size == 0.
  void validate() const;
  std::string to_text() const;
};

/// Decision rule for one pair: NORMAL (1) iff similarity > 0.5.
int predict_label(double similarity);

struct Evaluation {
  double loss = 0.0;                 // mean clamped BCE
  std::vector<double> similarities;  // input order
  ConfusionMatrix confusion;
  MetricsRecord metrics;
  /// Per unknown subject, from aggregate_subject over its pairs.
  ConfusionMatrix subject_confusion;
  MetricsRecord subject_metrics;
};

/// Forward-only pass under NoGradGuard. Features are computed once per
/// distinct stack. Throws UsageError on an empty list.
Evaluation evaluate(const Model& model, std::span<const Combination> combos);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t selected_epoch = 0;
  std::optional<Evaluation> train;
  std::optional<Evaluation> validation;
  std::optional<Evaluation> test;
  std::uint64_t seed = 0;
  std::string config_snapshot;
  /// Measured, never serialized: reports must be byte-stable.
  double wall_clock_seconds = 0.0;
};

/// Trains `model` in place. Training loss and accuracy are running means over
/// the epoch's mini-batches; validation is evaluated after every epoch. The
/// final train/validation/test evaluations use the returned weights.
/// Throws ConfigError("train") when the training partition is empty.
TrainReport train(Model& model, const DatasetSplit& split, const Hyperparams& hyper);

}  // namespace mccnn

#endif  // MCCNN_TRAINING_HPP_
