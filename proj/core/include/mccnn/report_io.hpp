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

// Text serializations of training and experiment results. All numbers use
// the shortest round-trip form, so equal runs give equal bytes.

#ifndef MCCNN_REPORT_IO_HPP_
#define MCCNN_REPORT_IO_HPP_

#include <iosfwd>
#include <span>
#include <string>

#include "mccnn/experiments.hpp"
#include "mccnn/training.hpp"

namespace mccnn {

/// Epoch lines "epoch,train_loss,train_acc,val_loss,val_acc", then a
/// "[summary]" block of key=value lines and a "[config]" block.
void write_train_report(std::ostream& out, const TrainReport& report);

/// Only the epoch lines (with header), for plotting.
void write_curves(std::ostream& out, const TrainReport& report);

/// "lr,accuracy,recall,precision,f1".
void write_sweep_table(std::ostream& out, std::span<const SweepRow> rows);

/// Metrics table rows for an ablation study, one per row, fold "-".
std::vector<MetricsRow> ablation_metrics_rows(std::span<const AblationRow> rows);

/// "model,parameters,distance_length,accuracy,subject_accuracy".
void write_ablation_summary(std::ostream& out, std::span<const AblationRow> rows);

/// "fold,train_accuracy,validation_accuracy,test_accuracy" with mean and std
/// rows.
void write_fold_table(std::ostream& out, const CrossValidation& cv);

}  // namespace mccnn

#endif  // MCCNN_REPORT_IO_HPP_
