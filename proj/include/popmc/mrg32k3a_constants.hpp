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

#ifndef POPMC_MRG32K3A_CONSTANTS_HPP
#define POPMC_MRG32K3A_CONSTANTS_HPP

#include <cstdint>

// Parameters of the combined multiple recursive generator MRG32k3a, copied
// from P. L'Ecuyer, "Good Parameter Sets for Combined Multiple Recursive
// Random Number Generators", Operations Research 47(1), 1999, and the
// RngStreams reference code (L'Ecuyer, Simard, Chen, Kelton, Operations
// Research 50(6), 2002).
//
//   x1[n] = (a12 * x1[n-2] - a13n * x1[n-3]) mod m1
//   x2[n] = (a21 * x2[n-1] - a23n * x2[n-3]) mod m2
//   u[n]  = ((x1[n] - x2[n]) mod m1) / (m1 + 1), with 0 mapped to m1

namespace popmc::mrg32k3a {

inline constexpr std::uint64_t m1 = 4294967087ULL;
inline constexpr std::uint64_t m2 = 4294944443ULL;
inline constexpr std::uint64_t a12 = 1403580ULL;
inline constexpr std::uint64_t a13n = 810728ULL;
inline constexpr std::uint64_t a21 = 527612ULL;
inline constexpr std::uint64_t a23n = 1370589ULL;

// 1 / (m1 + 1) as printed in the reference code.
inline constexpr double norm = 2.328306549295727688e-10;

// RngStreams package seed.
inline constexpr std::uint64_t default_seed = 12345ULL;

// Distance between consecutive master streams, as log2 of the step count
// (the RngStreams stream spacing).
inline constexpr unsigned stream_spacing_log2 = 127;

}  // namespace popmc::mrg32k3a

#endif
