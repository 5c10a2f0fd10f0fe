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

#include "mccnn/report_io.hpp"

#include <ostream>

#include "text_util.hpp"

namespace mccnn {

namespace {

using detail::format_double;

void epoch_lines(std::ostream& out, const TrainReport& report) {
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.train_accuracy) << ','
        << format_metric(e.val_loss) << ',' << format_metric(e.val_accuracy) << '\n';
  }
}

void evaluation_block(std::ostream& out, const std::string& prefix, const std::optional<Evaluation>& ev) {
  if (!ev) {
    out << prefix << "_accuracy=NA\n";
    return;
  }
  out << prefix << "_loss=" << format_double(ev->loss) << '\n';
  out << prefix << "_accuracy=" << format_double(ev->metrics.accuracy) << '\n';
  out << prefix << "_recall=" << format_metric(ev->metrics.recall) << '\n';
  out << prefix << "_precision=" << format_metric(ev->metrics.precision) << '\n';
  out << prefix << "_f1=" << format_metric(ev->metrics.f1) << '\n';
  out << prefix << "_subject_accuracy=" << format_double(ev->subject_metrics.accuracy) << '\n';
}

}  // namespace

void write_train_report(std::ostream& out, const TrainReport& report) {
  epoch_lines(out, report);
  out << "[summary]\n";
  out << "seed=" << report.seed << '\n';
  out << "epochs=" << report.epochs.size() << '\n';
  out << "selected_epoch=" << report.selected_epoch << '\n';
  evaluation_block(out, "train", report.train);
  evaluation_block(out, "validation", report.validation);
  evaluation_block(out, "test", report.test);
  out << "[config]\n" << report.config_snapshot;
}

void write_curves(std::ostream& out, const TrainReport& report) { epoch_lines(out, report); }

void write_sweep_table(std::ostream& out, std::span<const SweepRow> rows) {
  out << "lr,accuracy,recall,precision,f1\n";
  for (const auto& r : rows) {
    const auto& m = r.test.metrics;
    out << format_double(r.learning_rate) << ',' << format_double(m.accuracy) << ',' << format_metric(m.recall)
        << ',' << format_metric(m.precision) << ',' << format_metric(m.f1) << '\n';
  }
}

std::vector<MetricsRow> ablation_metrics_rows(std::span<const AblationRow> rows) {
  std::vector<MetricsRow> out;
  for (const auto& r : rows) out.push_back(MetricsRow{r.name, "-", r.test.metrics});
  return out;
}

void write_ablation_summary(std::ostream& out, std::span<const AblationRow> rows) {
  out << "model,parameters,distance_length,accuracy,subject_accuracy\n";
  for (const auto& r : rows) {
    out << r.name << ',' << r.parameters << ',' << r.distance_length << ',' << format_double(r.test.metrics.accuracy)
        << ',' << format_double(r.test.subject_metrics.accuracy) << '\n';
  }
}

void write_fold_table(std::ostream& out, const CrossValidation& cv) {
  out << "fold,train_accuracy,validation_accuracy,test_accuracy\n";
  auto line = [&](const std::string& name, const FoldScores& s) {
    out << name << ',' << format_double(s.train_accuracy) << ',' << format_double(s.validation_accuracy) << ','
        << format_double(s.test_accuracy) << '\n';
  };
  for (std::size_t f = 0; f < cv.folds.size(); ++f) line(std::to_string(f + 1), cv.folds[f]);
  line("mean", cv.mean);
  line("std", cv.stddev);
}

}  // namespace mccnn
