// Copyright 2026 The IEFS-GMB Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace iefs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes or feature dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input data or specification failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// API called in the wrong state (open tape, double decay, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or incomplete configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary file. Carries the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Non-finite loss during training.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t iteration)
      : Error(what), iteration_(iteration) {}
  std::int64_t iteration() const { return iteration_; }

 private:
  std::int64_t iteration_;
};

}  // namespace iefs
