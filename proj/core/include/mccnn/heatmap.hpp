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

#ifndef MCCNN_HEATMAP_HPP_
#define MCCNN_HEATMAP_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mccnn/gaze_synth.hpp"
#include "mccnn/tensor.hpp"

namespace mccnn {

enum class ImpulseWeighting { kDuration, kUnit };

struct HeatmapOptions {
  std::size_t height = 32;
  std::size_t width = 32;
  double sigma_px = 2.0;
  ImpulseWeighting weighting = ImpulseWeighting::kDuration;

  /// Grid of the given size with sigma = width / 16.
  static HeatmapOptions for_grid(std::size_t height, std::size_t width);
  void validate() const;
};

/// Row-major float64 field on the heatmap grid.
struct DensityField {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

/// Normalized 1-D Gaussian taps, radius ceil(3 sigma).
std::vector<double> gaussian_kernel_1d(double sigma_px);

/// Weighted impulses at the fixation pixels (x*(W-1), y*(H-1), rounded).
DensityField accumulate_impulses(const FixationSession& session, int stimulus_id,
                                 const HeatmapOptions& options);
/// Impulses convolved with the truncated Gaussian (zero outside the grid),
/// before normalization.
DensityField smooth_density(const FixationSession& session, int stimulus_id,
                            const HeatmapOptions& options);
/// smooth_density divided by its maximum; all zero when there are no fixations.
DensityField render_field(const FixationSession& session, int stimulus_id,
                          const HeatmapOptions& options);

/// A normalized single-stimulus heatmap stored at float32 precision, the
/// precision of the stack file format.
struct Heatmap {
  int subject_id = 0;
  int stimulus_id = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;

  float at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

/// render_field rounded to float32. Throws UsageError for an unknown stimulus.
Heatmap render_heatmap(const FixationSession& session, int stimulus_id,
                       const HeatmapOptions& options);

/// A subject's heatmaps stacked channel-wise, channel c = stimulus c.
struct HeatmapStack {
  int subject_id = -1;
  std::optional<Group> group;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;  // channel-major, row-major

  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(values).subspan(c * height * width, height * width);
  }
  /// Checks sizes and that every channel is a valid normalized heatmap.
  void validate() const;
};

/// Requires exactly kStimulusCount heatmaps of one subject on one grid, one
/// per stimulus id; throws ValidationError otherwise. Input order is free.
HeatmapStack stack_heatmaps(std::span<const Heatmap> heatmaps, std::optional<Group> group = {});

/// Renders and stacks all stimuli of a session.
HeatmapStack render_stack(const FixationSession& session, const HeatmapOptions& options);

/// Single-channel alternative to channel stacking: the pixelwise mean of all
/// channels, renormalized to a maximum of 1.
HeatmapStack merge_channels(const HeatmapStack& stack);

/// [channels, H, W] float64 tensor.
Tensor stack_to_tensor(const HeatmapStack& stack);

}  // namespace mccnn

#endif  // MCCNN_HEATMAP_HPP_
