//
// Copyright 2026 The dplearn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dplearn/noise.h"

#include <cmath>

#include "dplearn/normal.h"

namespace dplearn {
namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kTwoPowMinus53 = 1.0 / 9007199254740992.0;

}  // namespace

uint64_t Mix64(uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

NoiseSource NoiseSource::Seeded(uint64_t seed) {
  return NoiseSource(Kind::kSeeded, seed);
}

NoiseSource NoiseSource::ZeroNoise() { return NoiseSource(Kind::kZeroNoise, 0); }

uint64_t NoiseSource::NextBits() {
  const uint64_t k = counter_++;
  return Mix64(seed_ ^ Mix64(k * kGolden));
}

double NoiseSource::Uniform() {
  if (is_zero_noise()) return 0.5;
  // k * 2^-53 with k in [1, 2^53); k = 0 is redrawn so the result is never 0.
  uint64_t k = 0;
  while (k == 0) k = NextBits() >> 11;
  return static_cast<double>(k) * kTwoPowMinus53;
}

double NoiseSource::Gaussian() {
  if (is_zero_noise()) return 0.0;
  return NormalQuantile(Uniform());
}

double NoiseSource::Laplace(double scale) {
  if (is_zero_noise()) return 0.0;
  const double u = Uniform() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0 ? -magnitude : magnitude;
}

NoiseSource NoiseSource::Split(uint64_t index) {
  if (is_zero_noise()) return ZeroNoise();
  const uint64_t base = NextBits();
  return Seeded(Mix64(base ^ Mix64(index)));
}

}  // namespace dplearn
