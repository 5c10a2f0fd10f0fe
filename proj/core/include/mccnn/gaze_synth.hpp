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

// Synthetic free-viewing sessions. Stimuli are abstract saliency layouts made
// of isotropic Gaussian components; subjects fixate a salient component with
// probability `saliency_adherence` and the uniform background otherwise.

#ifndef MCCNN_GAZE_SYNTH_HPP_
#define MCCNN_GAZE_SYNTH_HPP_

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace mccnn {

inline constexpr int kStimulusCount = 9;

enum class Group { kAd, kNormal };

std::string_view group_name(Group group);
/// Accepts "AD" or "NORMAL"; throws ValidationError otherwise.
Group parse_group(std::string_view name);

struct SalientComponent {
  double x = 0.5;  // center, normalized [0,1]
  double y = 0.5;
  double stddev = 0.04;
  double weight = 1.0;
};

struct StimulusSpec {
  int stimulus_id = 0;
  std::vector<SalientComponent> components;  // weights sum to 1
};

/// Nine stimuli with 1-4 components each, centers in [0.15, 0.85]^2.
std::vector<StimulusSpec> make_stimulus_set(std::uint64_t seed);

struct SubjectProfile {
  int subject_id = 0;
  Group group = Group::kNormal;
  double saliency_adherence = 0.8;
  int min_fixations = 8;
  int max_fixations = 15;
  double dispersion = 0.02;
  std::uint64_t seed = 0;
};

struct GroupBehavior {
  double adherence;
  double dispersion;
};

struct CohortConfig {
  GroupBehavior ad{0.4, 0.05};
  GroupBehavior normal{0.8, 0.02};
  int min_fixations = 8;
  int max_fixations = 15;
  /// Std of the per-subject adherence draw around the group value.
  double adherence_jitter = 0.05;

  void validate() const;
};

/// AD subjects get ids [0, n_ad), normals [n_ad, n_ad + n_normal). Each
/// profile's seed is mix_seed(seed, subject index), so a profile does not
/// depend on how many others are generated.
std::vector<SubjectProfile> sample_cohort(int n_ad, int n_normal, const CohortConfig& config,
                                          std::uint64_t seed);

struct Fixation {
  double x = 0.0;
  double y = 0.0;
  double duration_ms = 0.0;
};

struct FixationSession {
  int subject_id = 0;
  Group group = Group::kNormal;
  /// Indexed by stimulus id.
  std::vector<std::vector<Fixation>> fixations;
};

FixationSession simulate_session(const SubjectProfile& profile,
                                 const std::vector<StimulusSpec>& stimuli);

/// True when (x, y) lies within 3 std of some component center.
bool is_salient_hit(const Fixation& fixation, const StimulusSpec& stimulus);
/// Fraction of a session's fixations that are salient hits.
double salient_hit_rate(const FixationSession& session, const std::vector<StimulusSpec>& stimuli);

/// One line per fixation: subject_id,group,stimulus_id,x,y,duration_ms.
void write_fixations_csv(std::ostream& out, const std::vector<FixationSession>& sessions);
/// Inverse of write_fixations_csv. Sessions are returned sorted by subject id.
std::vector<FixationSession> read_fixations_csv(std::istream& in);

}  // namespace mccnn

#endif  // MCCNN_GAZE_SYNTH_HPP_
