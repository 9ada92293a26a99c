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

#ifndef POPMC_DETAIL_VMATH_HPP
#define POPMC_DETAIL_VMATH_HPP

#include <bit>
#include <cstdint>

// Branch-free exp for non-positive arguments, written so the compiler can
// vectorize loops over it. Cody-Waite reduction to r in [-ln2/2, ln2/2],
// then a Taylor polynomial; relative error below 1e-14 (double) and
// 3e-7 (float) on the supported domain.

namespace popmc::detail {

/// Domain [-708, 0]; smaller arguments are clamped.
inline double exp_nonpositive(double x) noexcept {
  constexpr double log2e = 1.4426950408889634074;
  constexpr double ln2_hi = 6.93147180369123816490e-01;
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  constexpr double shifter = 6755399441055744.0;  // 1.5 * 2^52
  x = x < -708.0 ? -708.0 : x;
  const double shifted = x * log2e + shifter;
  const double k = shifted - shifter;
  const double r = (x - k * ln2_hi) - k * ln2_lo;
  double p = 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  // The low mantissa bits of `shifted` hold k; move k + bias into the exponent.
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(shifted);
  return p * std::bit_cast<double>((bits + 1023U) << 52U);
}

/// Domain [-87, 0]; smaller arguments are clamped.
inline float exp_nonpositive(float x) noexcept {
  constexpr float log2e = 1.44269504f;
  constexpr float ln2_hi = 0.693145751953125f;
  constexpr float ln2_lo = 1.428606765330187e-06f;
  constexpr float shifter = 12582912.0f;  // 1.5 * 2^23
  x = x < -87.0f ? -87.0f : x;
  const float shifted = x * log2e + shifter;
  const float k = shifted - shifter;
  const float r = (x - k * ln2_hi) - k * ln2_lo;
  float p = 1.0f / 5040.0f;
  p = p * r + 1.0f / 720.0f;
  p = p * r + 1.0f / 120.0f;
  p = p * r + 1.0f / 24.0f;
  p = p * r + 1.0f / 6.0f;
  p = p * r + 0.5f;
  p = p * r + 1.0f;
  p = p * r + 1.0f;
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(shifted);
  return p * std::bit_cast<float>((bits + 127U) << 23U);
}

}  // namespace popmc::detail

#endif
