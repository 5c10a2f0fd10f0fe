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

// Pairwise augmentation: every unknown subject (AD or normal) is paired with
// every member of a reference group of normals. A pair is labeled 0 when the
// unknown subject is AD and 1 when it is normal.

#ifndef MCCNN_DATASET_HPP_
#define MCCNN_DATASET_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mccnn/heatmap.hpp"

namespace mccnn {

using StackPtr = std::shared_ptr<const HeatmapStack>;

inline constexpr int kLabelAd = 0;
inline constexpr int kLabelNormal = 1;

struct Combination {
  int id = 0;
  StackPtr unknown;
  StackPtr reference;

  /// Derived from the unknown subject's group; never stored separately.
  int label() const { return *unknown->group == Group::kAd ? kLabelAd : kLabelNormal; }
  int unknown_subject() const { return unknown->subject_id; }
  int reference_subject() const { return reference->subject_id; }
};

/// Cross product unknown x reference, AD unknowns first, ids 0..n-1.
/// Every stack must carry its group: AD for `unknown_ad`, NORMAL otherwise.
/// Throws ValidationError when a subject appears twice (including as both
/// unknown and reference) or carries the wrong group. Empty reference lists
/// are rejected too, as is having no unknown subjects at all.
std::vector<Combination> build_combinations(std::span<const StackPtr> unknown_ad,
                                            std::span<const StackPtr> unknown_normal,
                                            std::span<const StackPtr> references);

struct ReferenceSelection {
  std::vector<int> references;  // sorted
  std::vector<int> remaining;   // sorted
};

/// Seeded choice of `count` reference subjects out of `normal_ids`.
ReferenceSelection select_reference_group(std::span<const int> normal_ids, std::size_t count,
                                          std::uint64_t seed);

enum class SplitMode {
  /// All combinations of an unknown subject land in the same partition.
  kSubject,
  /// Combinations are assigned individually, with the same per-partition counts.
  kCombination,
};

std::string_view split_mode_name(SplitMode mode);
SplitMode parse_split_mode(std::string_view name);

struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;

  void validate() const;
};

/// Partition sizes for n items: validation and test are rounded to nearest
/// (exact halves round down), train takes the rest. Leftover goes to train,
/// or to validation when the train ratio is zero.
std::array<std::size_t, 3> allocate_counts(std::size_t n, const SplitRatios& ratios);

struct DatasetSplit {
  std::vector<Combination> train;
  std::vector<Combination> validation;
  std::vector<Combination> test;
  SplitMode mode = SplitMode::kSubject;
};

/// Stratified by label. Partition sizes are allocated per label over unknown
/// subjects; in combination mode each partition receives the same number of
/// combinations the subject allocation would give it, drawn individually.
/// Each partition is sorted by combination id.
DatasetSplit split_dataset(const std::vector<Combination>& combos, const SplitRatios& ratios,
                           SplitMode mode, std::uint64_t seed);

struct Fold {
  std::vector<std::size_t> train;  // indices into the combination list, sorted
  std::vector<std::size_t> test;
};

/// k stratified folds. Throws ConfigError when k < 2 or when there are too
/// few combinations (in subject mode, too few unknown subjects) to fill k
/// folds.
std::vector<Fold> make_folds(const std::vector<Combination>& combos, std::size_t k, SplitMode mode,
                             std::uint64_t seed);

struct ManifestRow {
  int combination_id = 0;
  int unknown_subject = 0;
  int reference_subject = 0;
  std::string unknown_path;
  std::string reference_path;
  int label = 0;
  std::string partition;  // train / validation / test, or "-"
  int fold = -1;
};

/// Comma-separated, header line, rows sorted by combination id.
void write_manifest(std::ostream& out, std::vector<ManifestRow> rows);
std::vector<ManifestRow> read_manifest(std::istream& in);

}  // namespace mccnn

#endif  // MCCNN_DATASET_HPP_
