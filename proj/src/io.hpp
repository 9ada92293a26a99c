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

// CSV, JSON and hashing helpers for experiment artifacts.

#ifndef POPMC_SRC_IO_HPP
#define POPMC_SRC_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace popmc::io {

/// Shortest decimal text that reads back to the same double.
[[nodiscard]] std::string format_double(double value);
[[nodiscard]] std::string format_uint(std::uint64_t value);

/// Row-oriented CSV builder with a header line.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  void add_numeric_row(const std::vector<double>& cells);

  [[nodiscard]] const std::string& text() const noexcept { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

/// Numeric table read from CSV; the first line is a header.
struct CsvTable {
  std::vector<std::string> header;
  std::size_t rows = 0;
  std::vector<double> values;  ///< rows x header.size()
};

[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

/// Writes the bytes to `path`, replacing any existing file. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view bytes);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes) noexcept;
[[nodiscard]] std::string hex64(std::uint64_t value);

}  // namespace popmc::io

#endif
