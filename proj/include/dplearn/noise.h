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

#ifndef DPLEARN_NOISE_H_
#define DPLEARN_NOISE_H_

#include <cstdint>

namespace dplearn {

// Single source of randomness for every mechanism and data generator.
//
// The seeded generator is counter based: draw k is a pure function of
// (seed, k), so a replay with the same seed and the same call sequence yields
// bit-identical draws within one build. Uniforms carry a 53-bit mantissa and
// Gaussian draws are the inverse normal CDF applied to such a uniform.
//
// The zero-noise oracle returns 0 for every Gaussian and Laplace draw and 1/2
// for every uniform. It exists to test estimators against their non-private
// plug-in counterparts and VOIDS ALL PRIVACY GUARANTEES.
//
// A NoiseSource is single-consumer; give each thread its own via Split().
class NoiseSource {
 public:
  enum class Kind { kSeeded, kZeroNoise };

  static NoiseSource Seeded(uint64_t seed);
  static NoiseSource ZeroNoise();

  Kind kind() const { return kind_; }
  bool is_zero_noise() const { return kind_ == Kind::kZeroNoise; }
  uint64_t seed() const { return seed_; }
  // Number of 64-bit blocks consumed so far.
  uint64_t counter() const { return counter_; }

  uint64_t NextBits();
  // Uniform on the open interval (0, 1).
  double Uniform();
  // Standard normal draw.
  double Gaussian();
  double Gaussian(double stddev) { return stddev * Gaussian(); }
  // Laplace draw with density exp(-|x|/scale) / (2 scale).
  double Laplace(double scale);
  bool Bernoulli(double p) { return Uniform() < p; }

  // Derives an independent child stream. Consumes one block from this source
  // and hashes it with `index`, so repeated calls give fresh children while the
  // whole tree stays a deterministic function of the root seed.
  NoiseSource Split(uint64_t index);

 private:
  NoiseSource(Kind kind, uint64_t seed) : kind_(kind), seed_(seed) {}

  Kind kind_;
  uint64_t seed_;
  uint64_t counter_ = 0;
};

// SplitMix64 finalizer; a bijective 64-bit mixer.
uint64_t Mix64(uint64_t x);

}  // namespace dplearn

#endif  // DPLEARN_NOISE_H_
