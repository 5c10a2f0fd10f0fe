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

#include "mccnn/metrics.hpp"

#include <ostream>

#include "mccnn/error.hpp"
#include "text_util.hpp"

namespace mccnn {

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw UsageError("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                     std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw UsageError("confusion: no items");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i];
    const int l = labels[i];
    if ((p != 0 && p != 1) || (l != 0 && l != 1)) throw UsageError("confusion: labels must be 0 or 1");
    const bool pred_pos = p == kPositiveLabel;
    const bool true_pos = l == kPositiveLabel;
    if (pred_pos && true_pos) {
      ++cm.tp;
    } else if (pred_pos) {
      ++cm.fp;
    } else if (true_pos) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

std::optional<double> f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return std::nullopt;
  return 2.0 * precision * recall / (precision + recall);
}

MetricsRecord metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw UsageError("metrics: empty confusion matrix");
  MetricsRecord m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  if (cm.tp + cm.fn > 0) m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  if (cm.tp + cm.fp > 0) m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  if (m.recall && m.precision) m.f1 = f1_score(*m.precision, *m.recall);
  return m;
}

Group aggregate_subject(std::span<const double> similarities, double threshold) {
  if (similarities.empty()) throw UsageError("aggregate_subject: no similarities");
  double total = 0.0;
  for (double s : similarities) total += s;
  const double mean = total / static_cast<double>(similarities.size());
  return mean > threshold ? Group::kNormal : Group::kAd;
}

std::string format_metric(const std::optional<double>& value) {
  return value ? detail::format_double(*value) : std::string("NA");
}

void write_metrics_table(std::ostream& out, std::span<const MetricsRow> rows) {
  out << "model,fold,accuracy,recall,precision,f1\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.fold << ',' << detail::format_double(r.values.accuracy) << ','
        << format_metric(r.values.recall) << ',' << format_metric(r.values.precision) << ','
        << format_metric(r.values.f1) << '\n';
  }
}

}  // namespace mccnn
