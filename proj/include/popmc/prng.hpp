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

#ifndef POPMC_PRNG_HPP
#define POPMC_PRNG_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace popmc {

/// State of one MRG32k3a stream: the last three values of each component
/// recurrence, oldest first.
struct Mrg32k3aState {
  std::array<std::uint64_t, 3> s1;
  std::array<std::uint64_t, 3> s2;

  /// Residues in range and neither component all zero.
  [[nodiscard]] bool valid() const noexcept;

  friend bool operator==(const Mrg32k3aState&, const Mrg32k3aState&) = default;
};

/// The package seed (12345, ..., 12345) of the reference implementation.
[[nodiscard]] Mrg32k3aState reference_seed_state() noexcept;

/// Start of master stream `master_seed`: the reference seed advanced by
/// master_seed * 2^127 steps. Master seed 0 is the reference seed itself.
[[nodiscard]] Mrg32k3aState seed_state(std::uint64_t master_seed);

/// Advances one step and returns the integer output in [1, m1].
std::uint32_t next_raw(Mrg32k3aState& state) noexcept;

/// Advances one step and returns a uniform in the open interval (0, 1).
double next_uniform(Mrg32k3aState& state) noexcept;

/// State after `n` calls to next_uniform, using one matrix-vector product
/// per set bit of `n` against precomputed powers of the transition matrices.
/// When `matvec_products` is given it receives the number of products used
/// (per component).
[[nodiscard]] Mrg32k3aState skip_ahead(const Mrg32k3aState& state, std::uint64_t n,
                                       std::size_t* matvec_products = nullptr);

inline constexpr std::uint64_t kDefaultBlockLength = std::uint64_t{1} << 40;

/// Contiguous, disjoint blocks of one master stream.
struct StreamPartition {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_count = 1;
  std::uint64_t block_length = kDefaultBlockLength;
};

/// Stream i starts at skip_ahead(seed_state(master_seed), i * block_length).
/// Throws ConfigError for a zero count or length, or when the last block
/// start does not fit in 64 bits.
[[nodiscard]] std::vector<Mrg32k3aState> make_substreams(const StreamPartition& partition);

/// Marsaglia's 128-bit xorshift (shifts 11, 19, 8), period 2^128 - 1.
struct XorshiftState {
  std::array<std::uint32_t, 4> words;

  [[nodiscard]] bool valid() const noexcept;

  friend bool operator==(const XorshiftState&, const XorshiftState&) = default;
};

std::uint32_t next_raw(XorshiftState& state) noexcept;
double next_uniform(XorshiftState& state) noexcept;

/// Seeds for `stream_count` xorshift streams. Stream i takes four raw MRG32k3a
/// outputs starting at position 4 * i of master stream `master_seed`; MRG
/// outputs are never zero, so no seed is all zero.
[[nodiscard]] std::vector<XorshiftState> xorshift_make_seeds(std::uint64_t master_seed,
                                                             std::uint64_t stream_count);

enum class GeneratorKind { mrg32k3a, xorshift };

[[nodiscard]] GeneratorKind parse_generator(std::string_view name);
[[nodiscard]] std::string_view to_string(GeneratorKind kind) noexcept;

/// A uniform source plus the Box-Muller cache. Each pair of normals consumes
/// exactly two uniforms; the second normal of a pair is returned by the
/// following call.
class RandomStream {
 public:
  RandomStream() noexcept : RandomStream(reference_seed_state()) {}
  explicit RandomStream(const Mrg32k3aState& state) noexcept;
  explicit RandomStream(const XorshiftState& state) noexcept;

  double uniform() noexcept;
  double normal() noexcept;

  [[nodiscard]] GeneratorKind kind() const noexcept { return kind_; }
  [[nodiscard]] const Mrg32k3aState& mrg_state() const noexcept { return mrg_; }
  [[nodiscard]] const XorshiftState& xorshift_state() const noexcept { return xorshift_; }

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  GeneratorKind kind_;
  Mrg32k3aState mrg_{};
  XorshiftState xorshift_{};
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// One independent stream per element, from either generator family.
[[nodiscard]] std::vector<RandomStream> make_streams(GeneratorKind kind, std::uint64_t master_seed,
                                                     std::uint64_t stream_count,
                                                     std::uint64_t block_length = kDefaultBlockLength);

}  // namespace popmc

#endif
