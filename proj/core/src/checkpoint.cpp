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

#include "mccnn/checkpoint.hpp"

#include "binary_io.hpp"
#include "mccnn/error.hpp"

namespace mccnn {

namespace {

constexpr std::string_view kMagic = "MCNN";
constexpr std::uint32_t kMaxRank = 8;

}  // namespace

std::vector<std::byte> encode_checkpoint(const Model& model) {
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  const std::string config = model.config().to_text();
  w.u32(static_cast<std::uint32_t>(config.size()));
  w.bytes(config);
  const auto params = model.named_parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.data()) w.f64(v);
  }
  return w.buffer();
}

Model decode_checkpoint(std::span<const std::byte> bytes) {
  detail::ByteReader r(bytes);
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size(), "magic") != kMagic) {
    throw FormatError("not a checkpoint file: bad magic", 0);
  }
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  const std::size_t config_at = r.offset();
  const std::uint32_t config_len = r.u32("config length");
  if (config_len > r.remaining()) {
    throw FormatError("config length " + std::to_string(config_len) + " exceeds the file", config_at);
  }
  const std::string_view text = r.bytes(config_len, "config text");
  ModelConfig config;
  try {
    config = ModelConfig::from_text(text);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad checkpoint config: ") + e.what(), config_at + 4);
  }
  Model model(config);

  const std::size_t count_at = r.offset();
  const std::uint32_t count = r.u32("tensor count");
  auto params = model.named_parameters();
  if (count != params.size()) {
    throw FormatError("checkpoint holds " + std::to_string(count) + " tensors, config implies " +
                          std::to_string(params.size()),
                      count_at);
  }
  for (auto& [name, t] : params) {
    const std::size_t header_at = r.offset();
    const std::uint32_t rank = r.u32("tensor rank");
    if (rank > kMaxRank) throw FormatError("tensor rank " + std::to_string(rank) + " too large", header_at);
    Shape shape(rank);
    for (auto& d : shape) d = r.u32("tensor dims");
    if (shape != t.shape()) {
      throw FormatError("tensor " + name + " has shape " + shape_to_string(shape) + ", expected " +
                            shape_to_string(t.shape()),
                        header_at);
    }
    r.need(t.numel() * 8, "tensor values");
    for (auto& v : t.mutable_data()) v = r.f64("tensor values");
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint", r.offset());
  return model;
}

void save_checkpoint(const Model& model, const std::string& path) {
  detail::write_file_bytes(path, encode_checkpoint(model));
}

Model load_checkpoint(const std::string& path) { return decode_checkpoint(detail::read_file_bytes(path)); }

}  // namespace mccnn
