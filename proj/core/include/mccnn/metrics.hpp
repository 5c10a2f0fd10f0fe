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

// Binary classification metrics with AD (label 0) as the positive class.

#ifndef MCCNN_METRICS_HPP_
#define MCCNN_METRICS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mccnn/gaze_synth.hpp"

namespace mccnn {

/// Label value treated as "positive" when counting.
inline constexpr int kPositiveLabel = 0;

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws UsageError when the inputs are empty or differ in length, and when
/// a value lies outside {0,1}.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels);

/// Undefined values (zero denominators) are empty optionals.
struct MetricsRecord {
  double accuracy = 0.0;
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
};

MetricsRecord metrics(const ConfusionMatrix& cm);

/// Harmonic mean of precision and recall; empty when both are zero.
std::optional<double> f1_score(double precision, double recall);

/// Subject decision from its pair similarities: NORMAL when the mean is above
/// the threshold, AD otherwise (ties go to AD).
Group aggregate_subject(std::span<const double> similarities, double threshold = 0.5);

/// "NA" for an empty optional, shortest round-trip text otherwise.
std::string format_metric(const std::optional<double>& value);

struct MetricsRow {
  std::string model;
  std::string fold;  // fold index, "mean", "std" or "-"
  MetricsRecord values;
};

/// Header "model,fold,accuracy,recall,precision,f1", rows in the given order.
void write_metrics_table(std::ostream& out, std::span<const MetricsRow> rows);

}  // namespace mccnn

#endif  // MCCNN_METRICS_HPP_
