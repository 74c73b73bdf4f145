// Copyright 2026 The rfcal Authors
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

#ifndef RFCAL_ERRORS_HPP_
#define RFCAL_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rfcal {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or unreadable on-disk data.
class FormatError : public Error {
 public:
  enum class Kind {
    bad_magic,
    bad_version,
    truncated,
    non_finite,
    bad_field,
  };

  FormatError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Underlying stream failure; carries the byte offset reached.
class IoError : public Error {
 public:
  IoError(std::uint64_t byte_offset, const std::string& msg)
      : Error(msg + " (at byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::uint64_t byte_offset() const { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

/// Frame or patch dimensions incompatible with the requested operation.
class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& msg) : Error(msg) {}
};

/// Invalid configuration or argument values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace rfcal

#endif  // RFCAL_ERRORS_HPP_
