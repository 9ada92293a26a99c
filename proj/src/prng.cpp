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

#include "popmc/prng.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "popmc/error.hpp"
#include "popmc/mrg32k3a_constants.hpp"

namespace popmc {
namespace {

using Matrix = std::array<std::array<std::uint64_t, 3>, 3>;
using Vector = std::array<std::uint64_t, 3>;

Matrix multiply(const Matrix& a, const Matrix& b, std::uint64_t m) noexcept {
  Matrix c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      unsigned __int128 acc = 0;
      for (int k = 0; k < 3; ++k) {
        acc += static_cast<unsigned __int128>(a[i][k]) * b[k][j];
      }
      c[i][j] = static_cast<std::uint64_t>(acc % m);
    }
  }
  return c;
}

Vector apply(const Matrix& a, const Vector& v, std::uint64_t m) noexcept {
  Vector out{};
  for (int i = 0; i < 3; ++i) {
    unsigned __int128 acc = 0;
    for (int k = 0; k < 3; ++k) {
      acc += static_cast<unsigned __int128>(a[i][k]) * v[k];
    }
    out[i] = static_cast<std::uint64_t>(acc % m);
  }
  return out;
}

constexpr Matrix kTransition1{{{0, 1, 0}, {0, 0, 1}, {mrg32k3a::m1 - mrg32k3a::a13n, mrg32k3a::a12, 0}}};
constexpr Matrix kTransition2{{{0, 1, 0}, {0, 0, 1}, {mrg32k3a::m2 - mrg32k3a::a23n, 0, mrg32k3a::a21}}};

// powers[j] = A^(2^j), j = 0..127.
struct PowerTable {
  std::array<Matrix, 128> first;
  std::array<Matrix, 128> second;
};

const PowerTable& power_table() {
  static const PowerTable table = [] {
    PowerTable t{};
    t.first[0] = kTransition1;
    t.second[0] = kTransition2;
    for (std::size_t j = 1; j < t.first.size(); ++j) {
      t.first[j] = multiply(t.first[j - 1], t.first[j - 1], mrg32k3a::m1);
      t.second[j] = multiply(t.second[j - 1], t.second[j - 1], mrg32k3a::m2);
    }
    return t;
  }();
  return table;
}

}  // namespace

bool Mrg32k3aState::valid() const noexcept {
  bool nonzero1 = false;
  bool nonzero2 = false;
  for (int i = 0; i < 3; ++i) {
    if (s1[i] >= mrg32k3a::m1 || s2[i] >= mrg32k3a::m2) return false;
    nonzero1 = nonzero1 || s1[i] != 0;
    nonzero2 = nonzero2 || s2[i] != 0;
  }
  return nonzero1 && nonzero2;
}

Mrg32k3aState reference_seed_state() noexcept {
  constexpr auto s = mrg32k3a::default_seed;
  return {{s, s, s}, {s, s, s}};
}

Mrg32k3aState seed_state(std::uint64_t master_seed) {
  const auto& table = power_table();
  Matrix jump1 = table.first[mrg32k3a::stream_spacing_log2];
  Matrix jump2 = table.second[mrg32k3a::stream_spacing_log2];
  Mrg32k3aState state = reference_seed_state();
  while (master_seed != 0) {
    if (master_seed & 1U) {
      state.s1 = apply(jump1, state.s1, mrg32k3a::m1);
      state.s2 = apply(jump2, state.s2, mrg32k3a::m2);
    }
    master_seed >>= 1U;
    if (master_seed != 0) {
      jump1 = multiply(jump1, jump1, mrg32k3a::m1);
      jump2 = multiply(jump2, jump2, mrg32k3a::m2);
    }
  }
  return state;
}

std::uint32_t next_raw(Mrg32k3aState& state) noexcept {
  using namespace mrg32k3a;
  // Component 1: a12 * x[n-2] - a13n * x[n-3] (mod m1), kept non-negative.
  const std::uint64_t p1 = (a12 * state.s1[1] % m1 + m1 - a13n * state.s1[0] % m1) % m1;
  state.s1 = {state.s1[1], state.s1[2], p1};
  // Component 2: a21 * x[n-1] - a23n * x[n-3] (mod m2).
  const std::uint64_t p2 = (a21 * state.s2[2] % m2 + m2 - a23n * state.s2[0] % m2) % m2;
  state.s2 = {state.s2[1], state.s2[2], p2};
  return static_cast<std::uint32_t>(p1 > p2 ? p1 - p2 : p1 + m1 - p2);
}

double next_uniform(Mrg32k3aState& state) noexcept {
  return static_cast<double>(next_raw(state)) * mrg32k3a::norm;
}

Mrg32k3aState skip_ahead(const Mrg32k3aState& state, std::uint64_t n, std::size_t* matvec_products) {
  const auto& table = power_table();
  Mrg32k3aState out = state;
  std::size_t products = 0;
  for (unsigned bit = 0; n != 0; ++bit, n >>= 1U) {
    if (n & 1U) {
      out.s1 = apply(table.first[bit], out.s1, mrg32k3a::m1);
      out.s2 = apply(table.second[bit], out.s2, mrg32k3a::m2);
      ++products;
    }
  }
  if (matvec_products != nullptr) *matvec_products = products;
  return out;
}

std::vector<Mrg32k3aState> make_substreams(const StreamPartition& partition) {
  if (partition.stream_count == 0) throw ConfigError("stream_count must be positive");
  if (partition.block_length == 0) throw ConfigError("block_length must be positive");
  if (partition.stream_count - 1 >
      std::numeric_limits<std::uint64_t>::max() / partition.block_length) {
    throw ConfigError("stream partition exceeds the 64-bit position range");
  }
  std::vector<Mrg32k3aState> streams;
  streams.reserve(partition.stream_count);
  const Mrg32k3aState master = seed_state(partition.master_seed);
  // Successive blocks are one fixed jump apart.
  streams.push_back(master);
  if (partition.stream_count == 1) return streams;

  const auto& table = power_table();
  Matrix jump1{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Matrix jump2 = jump1;
  std::uint64_t n = partition.block_length;
  for (unsigned bit = 0; n != 0; ++bit, n >>= 1U) {
    if (n & 1U) {
      jump1 = multiply(table.first[bit], jump1, mrg32k3a::m1);
      jump2 = multiply(table.second[bit], jump2, mrg32k3a::m2);
    }
  }
  for (std::uint64_t i = 1; i < partition.stream_count; ++i) {
    const Mrg32k3aState& prev = streams.back();
    streams.push_back({apply(jump1, prev.s1, mrg32k3a::m1), apply(jump2, prev.s2, mrg32k3a::m2)});
  }
  return streams;
}

bool XorshiftState::valid() const noexcept {
  return (words[0] | words[1] | words[2] | words[3]) != 0;
}

std::uint32_t next_raw(XorshiftState& state) noexcept {
  auto& w = state.words;
  const std::uint32_t t = w[0] ^ (w[0] << 11U);
  w[0] = w[1];
  w[1] = w[2];
  w[2] = w[3];
  w[3] = w[3] ^ (w[3] >> 19U) ^ (t ^ (t >> 8U));
  return w[3];
}

double next_uniform(XorshiftState& state) noexcept {
  return (static_cast<double>(next_raw(state)) + 0.5) * 0x1p-32;
}

std::vector<XorshiftState> xorshift_make_seeds(std::uint64_t master_seed, std::uint64_t stream_count) {
  if (stream_count == 0) throw ConfigError("stream_count must be positive");
  std::vector<XorshiftState> seeds;
  seeds.reserve(stream_count);
  Mrg32k3aState hash = seed_state(master_seed);
  for (std::uint64_t i = 0; i < stream_count; ++i) {
    XorshiftState s{};
    for (auto& word : s.words) word = next_raw(hash);
    seeds.push_back(s);
  }
  return seeds;
}

GeneratorKind parse_generator(std::string_view name) {
  if (name == "mrg32k3a") return GeneratorKind::mrg32k3a;
  if (name == "xorshift") return GeneratorKind::xorshift;
  throw ConfigError("unknown generator '" + std::string(name) + "' (expected mrg32k3a or xorshift)");
}

std::string_view to_string(GeneratorKind kind) noexcept {
  return kind == GeneratorKind::mrg32k3a ? "mrg32k3a" : "xorshift";
}

RandomStream::RandomStream(const Mrg32k3aState& state) noexcept
    : kind_(GeneratorKind::mrg32k3a), mrg_(state) {}

RandomStream::RandomStream(const XorshiftState& state) noexcept
    : kind_(GeneratorKind::xorshift), xorshift_(state) {}

double RandomStream::uniform() noexcept {
  return kind_ == GeneratorKind::mrg32k3a ? next_uniform(mrg_) : next_uniform(xorshift_);
}

double RandomStream::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return std::exchange(cached_normal_, 0.0);
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::vector<RandomStream> make_streams(GeneratorKind kind, std::uint64_t master_seed,
                                       std::uint64_t stream_count, std::uint64_t block_length) {
  std::vector<RandomStream> streams;
  streams.reserve(stream_count);
  if (kind == GeneratorKind::mrg32k3a) {
    for (const auto& s : make_substreams({master_seed, stream_count, block_length})) {
      streams.emplace_back(s);
    }
  } else {
    for (const auto& s : xorshift_make_seeds(master_seed, stream_count)) streams.emplace_back(s);
  }
  return streams;
}

}  // namespace popmc
