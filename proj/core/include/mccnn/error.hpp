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

#ifndef MCCNN_ERROR_HPP_
#define MCCNN_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mccnn {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An API was called outside its contract (bad argument, wrong state).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is out of range or unknown. `key()` names the
/// offending setting when there is one.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string key = {})
      : Error(message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Input data violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A binary file is malformed. `offset()` is the byte position at which the
/// problem was detected.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::uint64_t offset)
      : Error(message + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace mccnn

#endif  // MCCNN_ERROR_HPP_
