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

// Heatmap stack file, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "HMST"
//   4       4     u32 version (1)
//   8       4     u32 n_channels
//   12      4     u32 height
//   16      4     u32 width
//   20      4*N   float32 values, channel-major then row-major (N = C*H*W)
//   20+4N   8     u64 XXH64 (seed 0) of the value bytes
//
// Subject id and group are not stored; they live in the stack index.

#ifndef MCCNN_STACK_IO_HPP_
#define MCCNN_STACK_IO_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mccnn/heatmap.hpp"

namespace mccnn {

inline constexpr std::uint32_t kStackFormatVersion = 1;

std::vector<std::byte> encode_stack(const HeatmapStack& stack);
/// Every header field is checked in file order. The first bad field, a short
/// payload or a checksum mismatch raises FormatError carrying its byte offset.
HeatmapStack decode_stack(std::span<const std::byte> bytes);

void write_stack(const HeatmapStack& stack, const std::string& path);
HeatmapStack read_stack(const std::string& path);

}  // namespace mccnn

#endif  // MCCNN_STACK_IO_HPP_
