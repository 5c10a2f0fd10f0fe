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

#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include "mccnn/checkpoint.hpp"
#include "mccnn/error.hpp"
#include "mccnn/report_io.hpp"
#include "mccnn/stack_io.hpp"
#include "mccnn/xxhash64.hpp"

namespace fs = std::filesystem;

namespace mccnn::app {

namespace {

constexpr const char* kFixations = "fixations.csv";
constexpr const char* kStacksDir = "stacks";
constexpr const char* kManifest = "dataset/manifest.csv";
constexpr const char* kCheckpoint = "train/model.ckpt";

void require(const fs::path& path, const char* producer) {
  if (!fs::exists(path)) {
    throw UsageError("missing input " + path.string() + " (run '" + producer + "' first)");
  }
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

std::string stack_name(int subject_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "subject_%04d.hmst", subject_id);
  return buf;
}

struct LoadedDataset {
  std::vector<Combination> combinations;  // sorted by id
  DatasetSplit split;
};

LoadedDataset load_dataset(const fs::path& out, SplitMode mode) {
  const fs::path manifest = out / kManifest;
  require(manifest, "dataset");
  std::ifstream in(manifest);
  const auto rows = read_manifest(in);
  // Stack files carry no group; the manifest restores subject and group.
  std::map<std::string, StackPtr> stacks;
  auto stack_at = [&](const std::string& rel, int subject, Group group) {
    auto it = stacks.find(rel);
    if (it == stacks.end()) {
      const fs::path p = out / rel;
      require(p, "heatmaps");
      auto s = std::make_shared<HeatmapStack>(read_stack(p.string()));
      s->subject_id = subject;
      s->group = group;
      it = stacks.emplace(rel, std::move(s)).first;
    }
    return it->second;
  };
  LoadedDataset d;
  d.split.mode = mode;
  for (const auto& r : rows) {
    const StackPtr unknown =
        stack_at(r.unknown_path, r.unknown_subject, r.label == kLabelAd ? Group::kAd : Group::kNormal);
    const StackPtr reference = stack_at(r.reference_path, r.reference_subject, Group::kNormal);
    Combination c{r.combination_id, unknown, reference};
    d.combinations.push_back(c);
    if (r.partition == "train") {
      d.split.train.push_back(c);
    } else if (r.partition == "validation") {
      d.split.validation.push_back(c);
    } else if (r.partition == "test") {
      d.split.test.push_back(c);
    }
  }
  if (d.combinations.empty()) throw ValidationError("dataset manifest " + manifest.string() + " is empty");
  return d;
}

void cmd_synth(const RunConfig& c, std::ostream& log) {
  const auto cohort = synthesize_cohort(c.data, c.seed);
  auto out = open_out(fs::path(c.out) / kFixations);
  write_fixations_csv(out, cohort.sessions);
  log << "synth: " << cohort.sessions.size() << " sessions -> " << (fs::path(c.out) / kFixations).string() << '\n';
}

void cmd_heatmaps(const RunConfig& c, std::ostream& log) {
  const fs::path src = fs::path(c.out) / kFixations;
  require(src, "synth");
  std::ifstream in(src);
  const auto sessions = read_fixations_csv(in);
  const fs::path dir = fs::path(c.out) / kStacksDir;
  fs::create_directories(dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".hmst") fs::remove(entry.path());
  }
  const auto stacks = render_stacks(sessions, c.heatmap_options(), c.data.merge_channels);
  for (const auto& [id, s] : stacks) write_stack(*s, (dir / stack_name(id)).string());
  log << "heatmaps: " << stacks.size() << " stacks -> " << dir.string() << '\n';
}

void cmd_dataset(const RunConfig& c, std::ostream& log) {
  const fs::path src = fs::path(c.out) / kFixations;
  require(src, "synth");
  const fs::path dir = fs::path(c.out) / kStacksDir;
  require(dir, "heatmaps");
  // Groups come from the fixation records; pixel data from the stack files.
  std::ifstream in(src);
  std::map<int, StackPtr> stacks;
  for (const auto& session : read_fixations_csv(in)) {
    const fs::path p = dir / stack_name(session.subject_id);
    require(p, "heatmaps");
    auto s = std::make_shared<HeatmapStack>(read_stack(p.string()));
    s->subject_id = session.subject_id;
    s->group = session.group;
    stacks.emplace(session.subject_id, std::move(s));
  }
  const auto paired = pair_cohort(stacks, c.data.references, stream_seed(c.seed, SeedStream::kReferences));
  const auto& combos = paired.combinations;
  const auto split = split_dataset(combos, c.ratios, c.split, stream_seed(c.seed, SeedStream::kSplit));
  const auto folds = make_folds(combos, c.folds, c.split, stream_seed(c.seed, SeedStream::kFolds));

  std::map<int, std::string> partition;
  for (const auto& x : split.train) partition[x.id] = "train";
  for (const auto& x : split.validation) partition[x.id] = "validation";
  for (const auto& x : split.test) partition[x.id] = "test";
  std::vector<int> fold_of(combos.size(), -1);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (auto i : folds[f].test) fold_of[i] = static_cast<int>(f);
  }
  std::vector<ManifestRow> rows;
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const auto& x = combos[i];
    rows.push_back(ManifestRow{x.id, x.unknown_subject(), x.reference_subject(),
                               std::string(kStacksDir) + "/" + stack_name(x.unknown_subject()),
                               std::string(kStacksDir) + "/" + stack_name(x.reference_subject()), x.label(),
                               partition.count(x.id) ? partition[x.id] : "-", fold_of[i]});
  }
  auto out = open_out(fs::path(c.out) / kManifest);
  write_manifest(out, rows);
  log << "dataset: " << combos.size() << " combinations (train " << split.train.size() << ", validation "
      << split.validation.size() << ", test " << split.test.size() << ")\n";
}

void cmd_train(const RunConfig& c, std::ostream& log) {
  const auto data = load_dataset(c.out, c.split);
  auto run = run_training(data.split, c.model_config(), c.hyperparams());
  const fs::path dir = fs::path(c.out) / "train";
  fs::create_directories(dir);
  save_checkpoint(run.model, (fs::path(c.out) / kCheckpoint).string());
  {
    auto out = open_out(dir / "report.txt");
    write_train_report(out, run.report);
  }
  {
    auto out = open_out(dir / "curves.csv");
    write_curves(out, run.report);
  }
  {
    auto out = open_out(dir / "config.txt");
    out << c.to_text();
  }
  const auto& last = run.report.epochs.back();
  log << "train: " << run.report.epochs.size() << " epochs in " << run.report.wall_clock_seconds
      << " s, final train loss " << last.train_loss;
  if (run.report.test) log << ", test accuracy " << run.report.test->metrics.accuracy;
  log << '\n';
}

void cmd_eval(const RunConfig& c, std::ostream& log) {
  const fs::path ckpt = fs::path(c.out) / kCheckpoint;
  require(ckpt, "train");
  const Model model = load_checkpoint(ckpt.string());
  const auto data = load_dataset(c.out, c.split);
  const auto& target = data.split.test.empty() ? data.combinations : data.split.test;
  const Evaluation ev = evaluate(model, target);
  const fs::path dir = fs::path(c.out) / "eval";
  {
    auto out = open_out(dir / "metrics.csv");
    const std::vector<MetricsRow> rows{{"mccnn", "-", ev.metrics}, {"mccnn-subject", "-", ev.subject_metrics}};
    write_metrics_table(out, rows);
  }
  {
    auto out = open_out(dir / "similarities.csv");
    out << "combination_id,unknown_subject,reference_subject,label,similarity\n";
    for (std::size_t i = 0; i < target.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", ev.similarities[i]);
      out << target[i].id << ',' << target[i].unknown_subject() << ',' << target[i].reference_subject() << ','
          << target[i].label() << ',' << buf << '\n';
    }
  }
  log << "eval: " << target.size() << " combinations, accuracy " << ev.metrics.accuracy << ", subject accuracy "
      << ev.subject_metrics.accuracy << '\n';
}

void cmd_sweep(const RunConfig& c, std::ostream& log) {
  const auto data = load_dataset(c.out, c.split);
  const auto rows = lr_sweep(c.lr_grid, data.split, c.model_config(), c.hyperparams());
  const fs::path dir = fs::path(c.out) / "sweep";
  {
    auto out = open_out(dir / "lr_sweep.csv");
    write_sweep_table(out, rows);
  }
  std::vector<MetricsRow> metrics_rows;
  for (const auto& r : rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "lr=%g", r.learning_rate);
    metrics_rows.push_back(MetricsRow{buf, "-", r.test.metrics});
  }
  auto out = open_out(dir / "metrics.csv");
  write_metrics_table(out, metrics_rows);
  for (const auto& r : rows) log << "sweep-lr: lr " << r.learning_rate << " accuracy " << r.test.metrics.accuracy << '\n';
}

void write_ablation(const fs::path& dir, const std::string& stem, const std::vector<AblationRow>& rows,
                    std::ostream& log) {
  {
    auto out = open_out(dir / (stem + "_metrics.csv"));
    write_metrics_table(out, ablation_metrics_rows(rows));
  }
  auto out = open_out(dir / (stem + "_summary.csv"));
  write_ablation_summary(out, rows);
  for (const auto& r : rows) log << stem << ": " << r.name << " accuracy " << r.test.metrics.accuracy << '\n';
}

void cmd_ablate_layers(const RunConfig& c, std::ostream& log) {
  const auto data = load_dataset(c.out, c.split);
  const auto rows = layer_ablation(c.layer_sets, data.split, c.model_config(), c.hyperparams());
  write_ablation(fs::path(c.out) / "ablation", "layers", rows, log);
}

void cmd_ablate_modules(const RunConfig& c, std::ostream& log) {
  const auto data = load_dataset(c.out, c.split);
  const auto rows = module_ablation(data.split, c.model_config(), c.hyperparams());
  write_ablation(fs::path(c.out) / "ablation", "modules", rows, log);
}

void cmd_xval(const RunConfig& c, std::ostream& log) {
  const auto data = load_dataset(c.out, c.split);
  const auto cv = cross_validate(data.combinations, c.folds, c.split, c.model_config(), c.hyperparams(), c.seed);
  const fs::path dir = fs::path(c.out) / "xval";
  {
    auto out = open_out(dir / "metrics.csv");
    write_metrics_table(out, cross_validation_rows("mccnn", cv));
  }
  auto out = open_out(dir / "folds.csv");
  write_fold_table(out, cv);
  log << "xval: mean test accuracy " << cv.mean.test_accuracy << " (std " << cv.stddev.test_accuracy << ")\n";
}

using Handler = std::function<void(const RunConfig&, std::ostream&)>;

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"synth", cmd_synth},
      {"heatmaps", cmd_heatmaps},
      {"dataset", cmd_dataset},
      {"train", cmd_train},
      {"eval", cmd_eval},
      {"sweep-lr", cmd_sweep},
      {"ablate-layers", cmd_ablate_layers},
      {"ablate-modules", cmd_ablate_modules},
      {"xval", cmd_xval},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, _] : handlers()) n.push_back(name);
    n.push_back("repro");
    return n;
  }();
  return names;
}

void run_command(const std::string& command, const RunConfig& config, std::ostream& log) {
  fs::create_directories(config.out);
  if (command == "repro") {
    for (const auto& [name, handler] : handlers()) {
      handler(config, log);
      write_output_manifest(config.out);
    }
    return;
  }
  for (const auto& [name, handler] : handlers()) {
    if (name == command) {
      handler(config, log);
      write_output_manifest(config.out);
      return;
    }
  }
  throw UsageError("unknown command '" + command + "'");
}

void write_output_manifest(const fs::path& out) {
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), out).generic_string();
    if (rel != "MANIFEST") files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  std::ofstream m(out / "MANIFEST", std::ios::binary | std::ios::trunc);
  if (!m) throw UsageError("cannot write " + (out / "MANIFEST").string());
  for (const auto& rel : files) {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(xxhash64_file((out / rel).string())));
    m << hex << "  " << rel << '\n';
  }
}

}  // namespace mccnn::app
