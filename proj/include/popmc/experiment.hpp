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

#ifndef POPMC_EXPERIMENT_HPP
#define POPMC_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "popmc/parallel.hpp"
#include "popmc/prng.hpp"

namespace popmc {

enum class ExperimentKind { istoy, popmcmc, smc_sampler, pfilter, gendata, bench };

/// Accepts the subcommand spellings: istoy, popmcmc, smc-sampler, pfilter,
/// gendata, bench.
[[nodiscard]] ExperimentKind parse_experiment(std::string_view name);
[[nodiscard]] std::string_view to_string(ExperimentKind kind) noexcept;

/// Flat key/value settings for one experiment. Construction fills in every
/// known key with its default, so an untouched config reproduces the
/// reference run shape. Unknown keys are rejected.
class ExperimentConfig {
 public:
  explicit ExperimentConfig(ExperimentKind kind);

  [[nodiscard]] ExperimentKind kind() const noexcept { return kind_; }

  /// Throws ConfigError for an unknown key. Values are checked when the
  /// experiment runs.
  void set(std::string_view key, std::string_view value);
  [[nodiscard]] bool has(std::string_view key) const;
  [[nodiscard]] const std::string& get(std::string_view key) const;

  /// Reads `key = value` lines; blank lines and lines starting with '#' are
  /// skipped. Throws IoError if unreadable, ConfigError on a bad line.
  void load_file(const std::filesystem::path& path);

  [[nodiscard]] const std::map<std::string, std::string, std::less<>>& values() const noexcept {
    return values_;
  }
  /// Sorted `key=value` lines; the basis of the config hash.
  [[nodiscard]] std::string canonical() const;
  /// FNV-1a of canonical().
  [[nodiscard]] std::uint64_t hash() const;

  [[nodiscard]] std::uint64_t get_uint(std::string_view key) const;
  [[nodiscard]] double get_double(std::string_view key) const;
  [[nodiscard]] bool get_bool(std::string_view key) const;
  [[nodiscard]] std::vector<double> get_doubles(std::string_view key) const;
  [[nodiscard]] std::vector<std::uint64_t> get_uints(std::string_view key) const;

 private:
  ExperimentKind kind_;
  std::map<std::string, std::string, std::less<>> values_;
};

struct RunSummary {
  std::vector<std::string> files;  ///< data artifacts, relative to the output directory
  double wall_clock_seconds = 0.0;
  std::filesystem::path manifest;
};

/// Runs the experiment, writes its artifacts and manifest.json into
/// `out_dir` (created if missing). Data artifacts depend only on the config
/// minus `workers`. Throws ConfigError, DegeneratePopulation or IoError.
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Importance-sampling toy: `particles` proposal draws, generated in blocks
/// of kIsToyBlock from consecutive streams so the draws do not depend on the
/// worker count.
struct IsToyConfig {
  std::uint64_t particles = 16777216;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  Precision precision = Precision::f64;
  GeneratorKind generator = GeneratorKind::mrg32k3a;
};

inline constexpr std::uint64_t kIsToyBlock = 65536;

/// Self-normalized estimate of E[X^2] under the toy target.
[[nodiscard]] ImportanceEstimate run_istoy(const IsToyConfig& config);

/// Simulated observations use this position of master stream `data_seed`,
/// far beyond any sampler substream of the same master stream.
inline constexpr std::uint64_t kDataStreamOffset = std::uint64_t{1} << 63;

[[nodiscard]] RandomStream data_stream(std::uint64_t data_seed);

struct BenchRow {
  std::string experiment;
  std::uint64_t size = 0;
  unsigned workers = 1;
  double median_seconds = 0.0;
  double speedup = 1.0;  ///< against workers = 1 at the same size, else the first entry
};

/// Median wall-clock of the engine call for every (size, workers) pair.
/// Keys: experiment, sizes, workers_list, repetitions and the base settings
/// of the timed experiment.
[[nodiscard]] std::vector<BenchRow> bench(const ExperimentConfig& config);

}  // namespace popmc

#endif
