// Copyright 2026 The popmc Authors
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

#ifndef POPMC_ERROR_HPP
#define POPMC_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace popmc {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  internal = 1,
  config = 2,
  numeric = 3,
  io = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// All weights vanished or became NaN.
class DegeneratePopulation : public Error {
 public:
  explicit DegeneratePopulation(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Raised by par_map: the lowest-indexed element whose kernel threw.
class ElementFailure : public Error {
 public:
  ElementFailure(ErrorKind kind, std::size_t index, const std::string& what)
      : Error(kind, "element " + std::to_string(index) + ": " + what), index_(index) {}

  [[nodiscard]] std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace popmc

#endif
