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

#include "mccnn/stack_io.hpp"

#include <limits>

#include "binary_io.hpp"
#include "mccnn/error.hpp"
#include "mccnn/xxhash64.hpp"

namespace mccnn {

namespace {

constexpr std::string_view kMagic = "HMST";
constexpr std::size_t kHeaderBytes = 20;
// Guards the size arithmetic; far above any grid the pipeline produces.
constexpr std::uint64_t kMaxValues = std::uint64_t{1} << 32;

}  // namespace

std::vector<std::byte> encode_stack(const HeatmapStack& stack) {
  if (stack.values.size() != stack.channels * stack.height * stack.width) {
    throw ValidationError("heatmap stack size does not match its shape");
  }
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kStackFormatVersion);
  w.u32(static_cast<std::uint32_t>(stack.channels));
  w.u32(static_cast<std::uint32_t>(stack.height));
  w.u32(static_cast<std::uint32_t>(stack.width));
  for (float v : stack.values) w.f32(v);
  w.u64(xxhash64(w.view(kHeaderBytes)));
  return w.buffer();
}

HeatmapStack decode_stack(std::span<const std::byte> bytes) {
  detail::ByteReader r(bytes);
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size(), "magic") != kMagic) {
    throw FormatError("not a heatmap stack file: bad magic", 0);
  }
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kStackFormatVersion) {
    throw FormatError("unsupported stack format version " + std::to_string(version), version_at);
  }
  const std::size_t shape_at = r.offset();
  const std::uint64_t channels = r.u32("channel count");
  const std::uint64_t height = r.u32("height");
  const std::uint64_t width = r.u32("width");
  if (channels == 0 || height == 0 || width == 0) {
    throw FormatError("stack shape has a zero dimension", shape_at);
  }
  if (channels * height > kMaxValues || channels * height * width > kMaxValues) {
    throw FormatError("stack shape overflows the supported size", shape_at);
  }
  const std::uint64_t n = channels * height * width;
  r.need(static_cast<std::size_t>(n) * 4 + 8, "stack payload");

  HeatmapStack stack;
  stack.channels = static_cast<std::size_t>(channels);
  stack.height = static_cast<std::size_t>(height);
  stack.width = static_cast<std::size_t>(width);
  stack.values.resize(static_cast<std::size_t>(n));
  for (auto& v : stack.values) v = r.f32("stack value");
  const std::size_t checksum_at = r.offset();
  const std::uint64_t expected = r.u64("checksum");
  if (xxhash64(r.span(kHeaderBytes, checksum_at)) != expected) {
    throw FormatError("stack payload checksum mismatch", checksum_at);
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after stack checksum", r.offset());
  return stack;
}

void write_stack(const HeatmapStack& stack, const std::string& path) {
  detail::write_file_bytes(path, encode_stack(stack));
}

HeatmapStack read_stack(const std::string& path) { return decode_stack(detail::read_file_bytes(path)); }

}  // namespace mccnn
