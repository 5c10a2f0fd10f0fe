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

#ifndef MCCNN_XXHASH64_HPP_
#define MCCNN_XXHASH64_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

namespace mccnn {

/// XXH64 as published by Yann Collet (little-endian lane reads).
std::uint64_t xxhash64(std::span<const std::byte> bytes, std::uint64_t seed = 0);

/// XXH64 of a file's contents, seed 0. Throws UsageError if unreadable.
std::uint64_t xxhash64_file(const std::string& path);

/// SplitMix64 finalizer over (seed, index); used to derive independent
/// per-item seed streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace mccnn

#endif  // MCCNN_XXHASH64_HPP_
