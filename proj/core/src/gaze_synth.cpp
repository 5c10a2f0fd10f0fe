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

#include "mccnn/gaze_synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <string>

#include "mccnn/error.hpp"
#include "mccnn/xxhash64.hpp"
#include "text_util.hpp"

namespace mccnn {

namespace {

constexpr double kCenterMin = 0.15;
constexpr double kCenterMax = 0.85;
constexpr double kComponentStdMin = 0.03;
constexpr double kComponentStdMax = 0.05;
constexpr double kMinDurationMs = 100.0;
constexpr double kMaxDurationMs = 600.0;
constexpr double kHitRadiusStd = 3.0;

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::string_view group_name(Group group) { return group == Group::kAd ? "AD" : "NORMAL"; }

Group parse_group(std::string_view name) {
  name = detail::trim(name);
  if (name == "AD") return Group::kAd;
  if (name == "NORMAL") return Group::kNormal;
  throw ValidationError("unknown group '" + std::string(name) + "'");
}

std::vector<StimulusSpec> make_stimulus_set(std::uint64_t seed) {
  std::vector<StimulusSpec> stimuli;
  stimuli.reserve(kStimulusCount);
  for (int s = 0; s < kStimulusCount; ++s) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    std::uniform_int_distribution<int> n_components(1, 4);
    std::uniform_real_distribution<double> center(kCenterMin, kCenterMax);
    std::uniform_real_distribution<double> spread(kComponentStdMin, kComponentStdMax);
    std::uniform_real_distribution<double> weight(0.5, 1.5);

    StimulusSpec spec;
    spec.stimulus_id = s;
    const int n = n_components(rng);
    double total = 0.0;
    for (int c = 0; c < n; ++c) {
      SalientComponent comp;
      comp.x = center(rng);
      comp.y = center(rng);
      comp.stddev = spread(rng);
      comp.weight = weight(rng);
      total += comp.weight;
      spec.components.push_back(comp);
    }
    for (auto& comp : spec.components) comp.weight /= total;
    stimuli.push_back(std::move(spec));
  }
  return stimuli;
}

void CohortConfig::validate() const {
  for (const auto* g : {&ad, &normal}) {
    if (!(g->adherence >= 0.0 && g->adherence <= 1.0)) {
      throw ConfigError("saliency adherence must lie in [0,1]", "adherence");
    }
    if (!(g->dispersion >= 0.0)) throw ConfigError("dispersion must be >= 0", "dispersion");
  }
  if (min_fixations < 1 || max_fixations < min_fixations) {
    throw ConfigError("fixation count range must satisfy 1 <= min <= max", "fixations");
  }
  if (!(adherence_jitter >= 0.0)) throw ConfigError("adherence jitter must be >= 0", "adherence_jitter");
}

std::vector<SubjectProfile> sample_cohort(int n_ad, int n_normal, const CohortConfig& config,
                                          std::uint64_t seed) {
  if (n_ad < 0 || n_normal < 0) throw ConfigError("cohort sizes must be >= 0", "n_ad");
  config.validate();
  std::vector<SubjectProfile> cohort;
  cohort.reserve(static_cast<std::size_t>(n_ad + n_normal));
  for (int i = 0; i < n_ad + n_normal; ++i) {
    SubjectProfile p;
    p.subject_id = i;
    p.group = i < n_ad ? Group::kAd : Group::kNormal;
    p.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    const auto& behavior = p.group == Group::kAd ? config.ad : config.normal;
    double adherence = behavior.adherence;
    if (config.adherence_jitter > 0.0) {
      std::mt19937_64 rng(mix_seed(p.seed, 0));
      std::normal_distribution<double> jitter(0.0, config.adherence_jitter);
      adherence = std::clamp(adherence + jitter(rng), 0.0, 1.0);
    }
    p.saliency_adherence = adherence;
    p.dispersion = behavior.dispersion;
    p.min_fixations = config.min_fixations;
    p.max_fixations = config.max_fixations;
    cohort.push_back(p);
  }
  return cohort;
}

FixationSession simulate_session(const SubjectProfile& profile,
                                 const std::vector<StimulusSpec>& stimuli) {
  if (stimuli.empty()) throw UsageError("simulate_session: empty stimulus list");
  if (profile.min_fixations < 1 || profile.max_fixations < profile.min_fixations) {
    throw UsageError("simulate_session: invalid fixation count range");
  }
  FixationSession session;
  session.subject_id = profile.subject_id;
  session.group = profile.group;
  session.fixations.resize(stimuli.size());

  const double log_min = std::log(kMinDurationMs);
  const double log_max = std::log(kMaxDurationMs);

  for (std::size_t s = 0; s < stimuli.size(); ++s) {
    const auto& stimulus = stimuli[s];
    if (stimulus.components.empty()) throw UsageError("simulate_session: stimulus without components");
    std::mt19937_64 rng(mix_seed(profile.seed, s + 1));
    std::uniform_int_distribution<int> count(profile.min_fixations, profile.max_fixations);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> log_duration(log_min, log_max);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> weights;
    for (const auto& c : stimulus.components) weights.push_back(c.weight);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

    const int n = count(rng);
    auto& out = session.fixations[s];
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Fixation f;
      if (unit(rng) < profile.saliency_adherence) {
        const auto& comp = stimulus.components[pick(rng)];
        // Radially truncated at 3 std so every salient draw is a hit.
        double zx = 0.0, zy = 0.0;
        do {
          zx = gauss(rng);
          zy = gauss(rng);
        } while (zx * zx + zy * zy > kHitRadiusStd * kHitRadiusStd);
        f.x = clip01(comp.x + comp.stddev * zx);
        f.y = clip01(comp.y + comp.stddev * zy);
      } else {
        f.x = unit(rng);
        f.y = unit(rng);
      }
      if (profile.dispersion > 0.0) {
        f.x = clip01(f.x + profile.dispersion * gauss(rng));
        f.y = clip01(f.y + profile.dispersion * gauss(rng));
      }
      f.duration_ms = std::exp(log_duration(rng));
      out.push_back(f);
    }
  }
  return session;
}

bool is_salient_hit(const Fixation& fixation, const StimulusSpec& stimulus) {
  for (const auto& c : stimulus.components) {
    const double dx = fixation.x - c.x;
    const double dy = fixation.y - c.y;
    const double r = kHitRadiusStd * c.stddev;
    if (dx * dx + dy * dy <= r * r) return true;
  }
  return false;
}

double salient_hit_rate(const FixationSession& session, const std::vector<StimulusSpec>& stimuli) {
  std::size_t hits = 0, total = 0;
  for (std::size_t s = 0; s < session.fixations.size() && s < stimuli.size(); ++s) {
    for (const auto& f : session.fixations[s]) {
      hits += is_salient_hit(f, stimuli[s]) ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

void write_fixations_csv(std::ostream& out, const std::vector<FixationSession>& sessions) {
  out << "subject_id,group,stimulus_id,x,y,duration_ms\n";
  for (const auto& session : sessions) {
    for (std::size_t s = 0; s < session.fixations.size(); ++s) {
      for (const auto& f : session.fixations[s]) {
        out << session.subject_id << ',' << group_name(session.group) << ',' << s << ','
            << detail::format_double(f.x) << ',' << detail::format_double(f.y) << ','
            << detail::format_double(f.duration_ms) << '\n';
      }
    }
  }
}

std::vector<FixationSession> read_fixations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "subject_id,group,stimulus_id,x,y,duration_ms") {
    throw ValidationError("fixation file: missing or wrong header line");
  }
  std::map<int, FixationSession> by_subject;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != 6) {
      throw ValidationError("fixation file line " + std::to_string(line_no) + ": expected 6 fields");
    }
    const int subject = detail::parse_number<int>(fields[0], "subject_id");
    const Group group = parse_group(fields[1]);
    const int stimulus = detail::parse_number<int>(fields[2], "stimulus_id");
    Fixation f;
    f.x = detail::parse_number<double>(fields[3], "x");
    f.y = detail::parse_number<double>(fields[4], "y");
    f.duration_ms = detail::parse_number<double>(fields[5], "duration_ms");
    if (stimulus < 0 || stimulus >= kStimulusCount) {
      throw ValidationError("fixation file line " + std::to_string(line_no) + ": stimulus id out of range");
    }
    if (!(f.x >= 0.0 && f.x <= 1.0 && f.y >= 0.0 && f.y <= 1.0) || !(f.duration_ms > 0.0)) {
      throw ValidationError("fixation file line " + std::to_string(line_no) +
                            ": coordinates must lie in [0,1] and duration must be positive");
    }
    auto [it, inserted] = by_subject.try_emplace(subject);
    auto& session = it->second;
    if (inserted) {
      session.subject_id = subject;
      session.group = group;
      session.fixations.resize(kStimulusCount);
    } else if (session.group != group) {
      throw ValidationError("fixation file line " + std::to_string(line_no) + ": subject " +
                            std::to_string(subject) + " changes group");
    }
    session.fixations[static_cast<std::size_t>(stimulus)].push_back(f);
  }
  std::vector<FixationSession> sessions;
  sessions.reserve(by_subject.size());
  for (auto& [id, session] : by_subject) sessions.push_back(std::move(session));
  return sessions;
}

}  // namespace mccnn
