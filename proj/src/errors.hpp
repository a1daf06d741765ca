// Copyright 2026 The renyiplay Authors
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

#ifndef RENYIPLAY_ERRORS_HPP
#define RENYIPLAY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace renyiplay {

/// Error categories. The numeric values are part of the C API contract.
enum class ErrorKind : int {
  kConfig = 2,
  kInput = 3,
  kNumeric = 4,
  kDomain = 5,
  kState = 6,
  kIo = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid or inconsistent configuration (sizes, caps, schedule bounds).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

/// Malformed call arguments: unknown prompt, wrong response length, empty batch.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::kInput, what) {}
};

/// A non-finite value appeared where finiteness is guaranteed.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, std::string diagnostic = {})
      : Error(ErrorKind::kNumeric, what), diagnostic_(std::move(diagnostic)) {}

  /// JSON document describing the offending state, possibly empty.
  [[nodiscard]] const std::string& diagnostic() const noexcept { return diagnostic_; }

 private:
  std::string diagnostic_;
};

/// Support violation in a divergence computation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error(ErrorKind::kState, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace renyiplay

#endif  // RENYIPLAY_ERRORS_HPP
