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

// Pipeline commands. Each reads its inputs from, and writes its outputs to,
// the configured output directory:
//
//   synth          fixations.csv
//   heatmaps       stacks/subject_NNNN.hmst
//   dataset        dataset/manifest.csv
//   train          train/{model.ckpt,report.txt,curves.csv,config.txt}
//   eval           eval/{metrics.csv,similarities.csv}
//   sweep-lr       sweep/{lr_sweep.csv,metrics.csv}
//   ablate-layers  ablation/{layers_metrics.csv,layers_summary.csv}
//   ablate-modules ablation/{modules_metrics.csv,modules_summary.csv}
//   xval           xval/{metrics.csv,folds.csv}
//   repro          all of the above in order
//
// After every command MANIFEST lists each file under the directory with its
// XXH64 checksum.

#ifndef MCCNN_TOOLS_COMMANDS_HPP_
#define MCCNN_TOOLS_COMMANDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace mccnn::app {

const std::vector<std::string>& command_names();

/// Runs one command. Progress goes to `log`. Throws mccnn::Error subclasses;
/// a missing upstream artifact is a UsageError naming its path.
void run_command(const std::string& command, const RunConfig& config, std::ostream& log);

/// Rewrites <out>/MANIFEST: "<16 hex digits>  <relative path>" per file,
/// sorted by path.
void write_output_manifest(const std::filesystem::path& out);

}  // namespace mccnn::app

#endif  // MCCNN_TOOLS_COMMANDS_HPP_
