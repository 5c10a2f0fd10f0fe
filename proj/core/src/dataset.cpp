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

#include "mccnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "mccnn/error.hpp"
#include "mccnn/xxhash64.hpp"
#include "text_util.hpp"

namespace mccnn {

namespace {

constexpr char kManifestHeader[] =
    "combination_id,unknown_subject,reference_subject,unknown_path,reference_path,label,partition,fold";

std::size_t round_ties_down(double x) {
  const double fl = std::floor(x);
  return static_cast<std::size_t>(x - fl > 0.5 + 1e-9 ? fl + 1.0 : fl);
}

// Unknown subjects of one label, ordered by id, with their combination indices.
std::map<int, std::vector<std::size_t>> subjects_of_label(const std::vector<Combination>& combos, int label) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < combos.size(); ++i) {
    if (combos[i].label() == label) out[combos[i].unknown_subject()].push_back(i);
  }
  return out;
}

std::vector<int> shuffled_keys(const std::map<int, std::vector<std::size_t>>& subjects, std::uint64_t seed) {
  std::vector<int> ids;
  ids.reserve(subjects.size());
  for (const auto& [id, _] : subjects) ids.push_back(id);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  return ids;
}

}  // namespace

std::vector<Combination> build_combinations(std::span<const StackPtr> unknown_ad,
                                            std::span<const StackPtr> unknown_normal,
                                            std::span<const StackPtr> references) {
  if (unknown_ad.empty() && unknown_normal.empty()) throw ValidationError("no unknown subjects");
  if (references.empty()) throw ValidationError("empty reference group");

  std::set<int> unknown_ids;
  auto check_unknown = [&](const StackPtr& s, Group expected) {
    if (!s) throw ValidationError("null heatmap stack");
    if (s->group != expected) {
      throw ValidationError("subject " + std::to_string(s->subject_id) + " is not in group " +
                            std::string(group_name(expected)));
    }
    if (!unknown_ids.insert(s->subject_id).second) {
      throw ValidationError("subject " + std::to_string(s->subject_id) + " listed twice as unknown");
    }
  };
  for (const auto& s : unknown_ad) check_unknown(s, Group::kAd);
  for (const auto& s : unknown_normal) check_unknown(s, Group::kNormal);

  std::set<int> reference_ids;
  for (const auto& r : references) {
    if (!r) throw ValidationError("null heatmap stack");
    if (r->group != Group::kNormal) {
      throw ValidationError("reference subject " + std::to_string(r->subject_id) + " is not NORMAL");
    }
    if (unknown_ids.contains(r->subject_id)) {
      throw ValidationError("subject " + std::to_string(r->subject_id) +
                            " appears both as unknown and as reference");
    }
    if (!reference_ids.insert(r->subject_id).second) {
      throw ValidationError("reference subject " + std::to_string(r->subject_id) + " listed twice");
    }
  }

  std::vector<Combination> combos;
  combos.reserve((unknown_ad.size() + unknown_normal.size()) * references.size());
  int next_id = 0;
  for (auto list : {unknown_ad, unknown_normal}) {
    for (const auto& u : list) {
      for (const auto& r : references) combos.push_back(Combination{next_id++, u, r});
    }
  }
  return combos;
}

ReferenceSelection select_reference_group(std::span<const int> normal_ids, std::size_t count,
                                          std::uint64_t seed) {
  if (count == 0 || count > normal_ids.size()) {
    throw ConfigError("reference group size " + std::to_string(count) + " must be in [1, " +
                          std::to_string(normal_ids.size()) + "]",
                      "refs");
  }
  std::vector<int> ids(normal_ids.begin(), normal_ids.end());
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(mix_seed(seed, 0x5EF));
  std::shuffle(ids.begin(), ids.end(), rng);
  ReferenceSelection sel;
  sel.references.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count));
  sel.remaining.assign(ids.begin() + static_cast<std::ptrdiff_t>(count), ids.end());
  std::sort(sel.references.begin(), sel.references.end());
  std::sort(sel.remaining.begin(), sel.remaining.end());
  return sel;
}

std::string_view split_mode_name(SplitMode mode) {
  return mode == SplitMode::kSubject ? "subject" : "paper";
}

SplitMode parse_split_mode(std::string_view name) {
  if (name == "subject") return SplitMode::kSubject;
  if (name == "paper" || name == "combination") return SplitMode::kCombination;
  throw ConfigError("unknown split mode '" + std::string(name) + "'", "split");
}

void SplitRatios::validate() const {
  if (!(train >= 0.0 && validation >= 0.0 && test >= 0.0)) {
    throw ConfigError("split ratios must be non-negative", "ratios");
  }
  if (std::fabs(train + validation + test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1", "ratios");
  }
}

std::array<std::size_t, 3> allocate_counts(std::size_t n, const SplitRatios& ratios) {
  ratios.validate();
  const double dn = static_cast<double>(n);
  std::size_t val = round_ties_down(ratios.validation * dn);
  std::size_t test = round_ties_down(ratios.test * dn);
  while (val + test > n) {
    if (test > 0) {
      --test;
    } else {
      --val;
    }
  }
  std::size_t train = n - val - test;
  if (ratios.train == 0.0 && train > 0) {
    if (ratios.validation > 0.0) {
      val += train;
    } else {
      test += train;
    }
    train = 0;
  }
  return {train, val, test};
}

DatasetSplit split_dataset(const std::vector<Combination>& combos, const SplitRatios& ratios,
                           SplitMode mode, std::uint64_t seed) {
  ratios.validate();
  std::array<std::vector<std::size_t>, 3> parts;
  for (int label : {kLabelAd, kLabelNormal}) {
    const auto subjects = subjects_of_label(combos, label);
    if (subjects.empty()) continue;
    const auto order = shuffled_keys(subjects, mix_seed(seed, static_cast<std::uint64_t>(label)));
    const auto counts = allocate_counts(order.size(), ratios);

    if (mode == SplitMode::kSubject) {
      std::size_t next = 0;
      for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t i = 0; i < counts[p]; ++i, ++next) {
          const auto& members = subjects.at(order[next]);
          parts[p].insert(parts[p].end(), members.begin(), members.end());
        }
      }
    } else {
      std::array<std::size_t, 3> quota{};
      std::size_t next = 0;
      for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t i = 0; i < counts[p]; ++i, ++next) quota[p] += subjects.at(order[next]).size();
      }
      std::vector<std::size_t> pool;
      for (const auto& [_, members] : subjects) pool.insert(pool.end(), members.begin(), members.end());
      std::sort(pool.begin(), pool.end());
      std::mt19937_64 rng(mix_seed(seed, 100 + static_cast<std::uint64_t>(label)));
      std::shuffle(pool.begin(), pool.end(), rng);
      std::size_t at = 0;
      for (std::size_t p = 0; p < 3; ++p) {
        parts[p].insert(parts[p].end(), pool.begin() + static_cast<std::ptrdiff_t>(at),
                        pool.begin() + static_cast<std::ptrdiff_t>(at + quota[p]));
        at += quota[p];
      }
    }
  }

  DatasetSplit split;
  split.mode = mode;
  std::array<std::vector<Combination>*, 3> outs{&split.train, &split.validation, &split.test};
  for (std::size_t p = 0; p < 3; ++p) {
    std::sort(parts[p].begin(), parts[p].end());
    outs[p]->reserve(parts[p].size());
    for (auto i : parts[p]) outs[p]->push_back(combos[i]);
  }
  return split;
}

std::vector<Fold> make_folds(const std::vector<Combination>& combos, std::size_t k, SplitMode mode,
                             std::uint64_t seed) {
  if (k < 2) throw ConfigError("number of folds must be >= 2", "folds");
  if (combos.size() < k) throw ConfigError("fewer combinations than folds", "folds");

  std::vector<std::size_t> fold_of(combos.size(), 0);
  std::size_t dealt = 0;
  if (mode == SplitMode::kSubject) {
    std::size_t n_subjects = 0;
    std::array<std::map<int, std::vector<std::size_t>>, 2> by_label;
    for (int label : {kLabelAd, kLabelNormal}) {
      by_label[static_cast<std::size_t>(label)] = subjects_of_label(combos, label);
      n_subjects += by_label[static_cast<std::size_t>(label)].size();
    }
    if (k > n_subjects) {
      throw ConfigError(std::to_string(k) + " folds requested but only " + std::to_string(n_subjects) +
                            " unknown subjects",
                        "folds");
    }
    for (int label : {kLabelAd, kLabelNormal}) {
      const auto& subjects = by_label[static_cast<std::size_t>(label)];
      for (int id : shuffled_keys(subjects, mix_seed(seed, 200 + static_cast<std::uint64_t>(label)))) {
        for (auto i : subjects.at(id)) fold_of[i] = dealt % k;
        ++dealt;
      }
    }
  } else {
    for (int label : {kLabelAd, kLabelNormal}) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < combos.size(); ++i) {
        if (combos[i].label() == label) pool.push_back(i);
      }
      std::mt19937_64 rng(mix_seed(seed, 300 + static_cast<std::uint64_t>(label)));
      std::shuffle(pool.begin(), pool.end(), rng);
      for (auto i : pool) fold_of[i] = dealt++ % k;
    }
  }

  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < combos.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
    }
  }
  return folds;
}

void write_manifest(std::ostream& out, std::vector<ManifestRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const ManifestRow& a, const ManifestRow& b) { return a.combination_id < b.combination_id; });
  out << kManifestHeader << '\n';
  for (const auto& r : rows) {
    out << r.combination_id << ',' << r.unknown_subject << ',' << r.reference_subject << ','
        << r.unknown_path << ',' << r.reference_path << ',' << r.label << ','
        << (r.partition.empty() ? "-" : r.partition) << ',' << r.fold << '\n';
  }
}

std::vector<ManifestRow> read_manifest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kManifestHeader) {
    throw ValidationError("dataset manifest: missing or wrong header line");
  }
  std::vector<ManifestRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 8) {
      throw ValidationError("dataset manifest line " + std::to_string(line_no) + ": expected 8 fields");
    }
    ManifestRow r;
    r.combination_id = detail::parse_number<int>(f[0], "combination_id");
    r.unknown_subject = detail::parse_number<int>(f[1], "unknown_subject");
    r.reference_subject = detail::parse_number<int>(f[2], "reference_subject");
    r.unknown_path = std::string(detail::trim(f[3]));
    r.reference_path = std::string(detail::trim(f[4]));
    r.label = detail::parse_number<int>(f[5], "label");
    r.partition = std::string(detail::trim(f[6]));
    r.fold = detail::parse_number<int>(f[7], "fold");
    if (r.label != kLabelAd && r.label != kLabelNormal) {
      throw ValidationError("dataset manifest line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mccnn
