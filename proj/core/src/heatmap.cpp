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

#include "mccnn/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mccnn/error.hpp"

namespace mccnn {

HeatmapOptions HeatmapOptions::for_grid(std::size_t height, std::size_t width) {
  HeatmapOptions o;
  o.height = height;
  o.width = width;
  o.sigma_px = static_cast<double>(width) / 16.0;
  return o;
}

void HeatmapOptions::validate() const {
  if (height < 8 || width < 8) throw ConfigError("heatmap grid must be at least 8x8", "grid");
  if (!(sigma_px > 0.0) || !std::isfinite(sigma_px)) throw ConfigError("sigma must be > 0", "sigma");
}

std::vector<double> gaussian_kernel_1d(double sigma_px) {
  if (!(sigma_px > 0.0)) throw UsageError("gaussian kernel needs sigma > 0");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma_px));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma_px * sigma_px));
    taps[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (auto& t : taps) t /= total;
  return taps;
}

DensityField accumulate_impulses(const FixationSession& session, int stimulus_id,
                                 const HeatmapOptions& options) {
  options.validate();
  if (stimulus_id < 0 || static_cast<std::size_t>(stimulus_id) >= session.fixations.size()) {
    throw UsageError("unknown stimulus id " + std::to_string(stimulus_id) + " for subject " +
                     std::to_string(session.subject_id));
  }
  DensityField field{options.height, options.width,
                     std::vector<double>(options.height * options.width, 0.0)};
  const double sx = static_cast<double>(options.width - 1);
  const double sy = static_cast<double>(options.height - 1);
  for (const auto& f : session.fixations[static_cast<std::size_t>(stimulus_id)]) {
    const auto px = static_cast<std::size_t>(std::lround(std::clamp(f.x, 0.0, 1.0) * sx));
    const auto py = static_cast<std::size_t>(std::lround(std::clamp(f.y, 0.0, 1.0) * sy));
    const double w = options.weighting == ImpulseWeighting::kDuration ? f.duration_ms : 1.0;
    field.values[py * options.width + px] += w;
  }
  return field;
}

DensityField smooth_density(const FixationSession& session, int stimulus_id,
                            const HeatmapOptions& options) {
  const DensityField impulses = accumulate_impulses(session, stimulus_id, options);
  const auto taps = gaussian_kernel_1d(options.sigma_px);
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto h = static_cast<std::ptrdiff_t>(options.height);
  const auto w = static_cast<std::ptrdiff_t>(options.width);

  // Separable: rows, then columns. Mass falling outside the grid is dropped.
  std::vector<double> rows(impulses.values.size(), 0.0);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const auto xi = x + i;
        if (xi < 0 || xi >= w) continue;
        acc += taps[static_cast<std::size_t>(i + radius)] *
               impulses.values[static_cast<std::size_t>(y * w + xi)];
      }
      rows[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  DensityField out{options.height, options.width, std::vector<double>(rows.size(), 0.0)};
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
        const auto yj = y + j;
        if (yj < 0 || yj >= h) continue;
        acc += taps[static_cast<std::size_t>(j + radius)] * rows[static_cast<std::size_t>(yj * w + x)];
      }
      out.values[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  return out;
}

DensityField render_field(const FixationSession& session, int stimulus_id,
                          const HeatmapOptions& options) {
  DensityField field = smooth_density(session, stimulus_id, options);
  const double peak = *std::max_element(field.values.begin(), field.values.end());
  if (peak > 0.0) {
    for (auto& v : field.values) v /= peak;
  }
  return field;
}

Heatmap render_heatmap(const FixationSession& session, int stimulus_id, const HeatmapOptions& options) {
  const DensityField field = render_field(session, stimulus_id, options);
  Heatmap map;
  map.subject_id = session.subject_id;
  map.stimulus_id = stimulus_id;
  map.height = field.height;
  map.width = field.width;
  map.values.resize(field.values.size());
  std::transform(field.values.begin(), field.values.end(), map.values.begin(),
                 [](double v) { return static_cast<float>(v); });
  return map;
}

void HeatmapStack::validate() const {
  if (channels == 0 || height == 0 || width == 0) throw ValidationError("heatmap stack has an empty dimension");
  if (values.size() != channels * height * width) {
    throw ValidationError("heatmap stack holds " + std::to_string(values.size()) + " values, expected " +
                          std::to_string(channels * height * width));
  }
  for (std::size_t c = 0; c < channels; ++c) {
    const auto ch = channel(c);
    float peak = 0.0f;
    for (float v : ch) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw ValidationError("heatmap stack channel " + std::to_string(c) + " has a value outside [0,1]");
      }
      peak = std::max(peak, v);
    }
    if (peak != 0.0f && peak != 1.0f) {
      throw ValidationError("heatmap stack channel " + std::to_string(c) + " is not max-normalized");
    }
  }
}

HeatmapStack stack_heatmaps(std::span<const Heatmap> heatmaps, std::optional<Group> group) {
  if (heatmaps.size() != static_cast<std::size_t>(kStimulusCount)) {
    throw ValidationError("expected " + std::to_string(kStimulusCount) + " heatmaps, got " +
                          std::to_string(heatmaps.size()));
  }
  const auto& first = heatmaps.front();
  std::vector<const Heatmap*> by_stimulus(kStimulusCount, nullptr);
  for (const auto& map : heatmaps) {
    if (map.subject_id != first.subject_id) throw ValidationError("heatmaps from different subjects");
    if (map.height != first.height || map.width != first.width) {
      throw ValidationError("heatmaps on different grids");
    }
    if (map.values.size() != map.height * map.width) throw ValidationError("heatmap size mismatch");
    if (map.stimulus_id < 0 || map.stimulus_id >= kStimulusCount) {
      throw ValidationError("stimulus id " + std::to_string(map.stimulus_id) + " out of range");
    }
    auto& slot = by_stimulus[static_cast<std::size_t>(map.stimulus_id)];
    if (slot) throw ValidationError("duplicate stimulus id " + std::to_string(map.stimulus_id));
    slot = &map;
  }
  HeatmapStack stack;
  stack.subject_id = first.subject_id;
  stack.group = group;
  stack.channels = kStimulusCount;
  stack.height = first.height;
  stack.width = first.width;
  stack.values.reserve(stack.channels * stack.height * stack.width);
  for (const auto* map : by_stimulus) stack.values.insert(stack.values.end(), map->values.begin(), map->values.end());
  return stack;
}

HeatmapStack render_stack(const FixationSession& session, const HeatmapOptions& options) {
  if (session.fixations.size() != static_cast<std::size_t>(kStimulusCount)) {
    throw UsageError("session of subject " + std::to_string(session.subject_id) + " covers " +
                     std::to_string(session.fixations.size()) + " stimuli, expected " +
                     std::to_string(kStimulusCount));
  }
  std::vector<Heatmap> maps;
  maps.reserve(kStimulusCount);
  for (int s = 0; s < kStimulusCount; ++s) maps.push_back(render_heatmap(session, s, options));
  return stack_heatmaps(maps, session.group);
}

HeatmapStack merge_channels(const HeatmapStack& stack) {
  stack.validate();
  const std::size_t area = stack.height * stack.width;
  std::vector<double> merged(area, 0.0);
  for (std::size_t c = 0; c < stack.channels; ++c) {
    const auto ch = stack.channel(c);
    for (std::size_t i = 0; i < area; ++i) merged[i] += ch[i];
  }
  const double peak = *std::max_element(merged.begin(), merged.end());
  HeatmapStack out;
  out.subject_id = stack.subject_id;
  out.group = stack.group;
  out.channels = 1;
  out.height = stack.height;
  out.width = stack.width;
  out.values.resize(area);
  for (std::size_t i = 0; i < area; ++i) {
    out.values[i] = peak > 0.0 ? static_cast<float>(merged[i] / peak) : 0.0f;
  }
  return out;
}

Tensor stack_to_tensor(const HeatmapStack& stack) {
  std::vector<double> values(stack.values.begin(), stack.values.end());
  return Tensor(Shape{stack.channels, stack.height, stack.width}, std::move(values));
}

}  // namespace mccnn
