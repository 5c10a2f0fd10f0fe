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

// Model checkpoint file, little-endian:
//
//   "MCNN" | u32 version | u32 config length | config text (key=value lines)
//   | u32 tensor count | per tensor: u32 rank, rank x u32 dims, f64 values
//
// Tensors appear in Model::named_parameters() order.

#ifndef MCCNN_CHECKPOINT_HPP_
#define MCCNN_CHECKPOINT_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mccnn/model.hpp"

namespace mccnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::byte> encode_checkpoint(const Model& model);
/// Rebuilds the model from its stored config, then overwrites every
/// parameter. Throws FormatError with the offending byte offset.
Model decode_checkpoint(std::span<const std::byte> bytes);

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace mccnn

#endif  // MCCNN_CHECKPOINT_HPP_
