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

#include "mccnn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "mccnn/error.hpp"
#include "mccnn/ops.hpp"
#include "text_util.hpp"

namespace mccnn {

namespace {

using FeatureCache = std::unordered_map<const HeatmapStack*, std::vector<LayerFeatures>>;

const std::vector<LayerFeatures>& features_for(const StackPtr& stack, const Model& model, FeatureCache& cache) {
  auto it = cache.find(stack.get());
  if (it == cache.end()) {
    it = cache.emplace(stack.get(), extract_features(stack_to_tensor(*stack), model)).first;
  }
  return it->second;
}

Prediction forward(const Combination& combo, const Model& model, FeatureCache& cache) {
  const bool single = model.config().branching == Branching::kSingle;
  if (single != (combo.reference == nullptr)) {
    throw UsageError(single ? "single-branch model given a paired sample"
                            : "pairwise model given a sample without reference");
  }
  const auto& u = features_for(combo.unknown, model, cache);
  if (single) return predict_single(u, model);
  const auto& r = features_for(combo.reference, model, cache);
  return predict_pair(u, r, model);
}

double clamped_similarity(const Prediction& p) {
  return std::clamp(p.probabilities.at(1), kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

double bce_value(double similarity, int label) {
  return label == kLabelNormal ? -std::log(similarity) : -std::log(1.0 - similarity);
}

void copy_parameters(const Model& from, const Model& to) {
  auto src = from.parameters();
  auto dst = to.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::ranges::copy(src[i].data(), dst[i].mutable_data().begin());
  }
}

}  // namespace

void Hyperparams::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be a finite value >= 0", "lr");
  }
  if (epochs == 0) throw ConfigError("epochs must be >= 1", "epochs");
  if (batch_size == 0) throw ConfigError("batch size must be >= 1", "batch_size");
}

std::string Hyperparams::to_text() const {
  std::ostringstream out;
  out << "batch_size=" << batch_size << '\n';
  out << "epochs=" << epochs << '\n';
  out << "keep_best_validation=" << (keep_best_validation ? "true" : "false") << '\n';
  out << "lr=" << detail::format_double(learning_rate) << '\n';
  out << "seed=" << seed << '\n';
  return out.str();
}

int predict_label(double similarity) { return similarity > 0.5 ? kLabelNormal : kLabelAd; }

Evaluation evaluate(const Model& model, std::span<const Combination> combos) {
  if (combos.empty()) throw UsageError("evaluate: no combinations");
  NoGradGuard no_grad;
  FeatureCache cache;
  Evaluation ev;
  std::vector<int> predictions, labels;
  std::map<int, std::pair<std::vector<double>, int>> by_subject;
  double loss = 0.0;
  for (const auto& c : combos) {
    const double s = clamped_similarity(forward(c, model, cache));
    ev.similarities.push_back(s);
    predictions.push_back(predict_label(s));
    labels.push_back(c.label());
    loss += bce_value(s, c.label());
    auto& entry = by_subject[c.unknown_subject()];
    entry.first.push_back(s);
    entry.second = c.label();
  }
  ev.loss = loss / static_cast<double>(combos.size());
  ev.confusion = confusion(predictions, labels);
  ev.metrics = metrics(ev.confusion);

  std::vector<int> subject_pred, subject_label;
  for (const auto& [id, entry] : by_subject) {
    subject_pred.push_back(aggregate_subject(entry.first) == Group::kAd ? kLabelAd : kLabelNormal);
    subject_label.push_back(entry.second);
  }
  ev.subject_confusion = confusion(subject_pred, subject_label);
  ev.subject_metrics = metrics(ev.subject_confusion);
  return ev;
}

TrainReport train(Model& model, const DatasetSplit& split, const Hyperparams& hyper) {
  hyper.validate();
  if (split.train.empty()) throw ConfigError("training partition is empty", "train");
  const auto started = std::chrono::steady_clock::now();

  TrainReport report;
  report.seed = hyper.seed;
  report.config_snapshot = model.config().to_text() + hyper.to_text();

  auto params = model.parameters();
  for (auto& p : params) p.zero_grad();

  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(hyper.seed);

  std::optional<Model> best;
  double best_accuracy = -1.0;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_total = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      FeatureCache cache;
      std::vector<Tensor> losses;
      losses.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const Combination& c = split.train[order[i]];
        const Prediction p = forward(c, model, cache);
        Tensor loss = bce_loss(slice(p.probabilities, 1, 1), c.label());
        loss_total += loss.item();
        if (predict_label(clamped_similarity(p)) == c.label()) ++correct;
        losses.push_back(std::move(loss));
      }
      mean(concat(losses)).backward();
      sgd_step(params, hyper.learning_rate);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_total / static_cast<double>(order.size());
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    if (!split.validation.empty()) {
      const Evaluation val = evaluate(model, split.validation);
      stats.val_loss = val.loss;
      stats.val_accuracy = val.metrics.accuracy;
      if (hyper.keep_best_validation && val.metrics.accuracy > best_accuracy) {
        best_accuracy = val.metrics.accuracy;
        best = model.clone();
        report.selected_epoch = epoch;
      }
    }
    report.epochs.push_back(stats);
  }

  if (best) {
    copy_parameters(*best, model);
  } else {
    report.selected_epoch = hyper.epochs;
  }
  report.train = evaluate(model, split.train);
  if (!split.validation.empty()) report.validation = evaluate(model, split.validation);
  if (!split.test.empty()) report.test = evaluate(model, split.test);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace mccnn
