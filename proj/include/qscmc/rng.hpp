// Copyright 2026 The qscmc Authors
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

#ifndef QSCMC_RNG_HPP
#define QSCMC_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace qscmc {

/// Stream key layout used by the sampler: (purpose << 56) | (step << 32) | particle.
/// Every (seed, key) pair owns an independent generator, so the draws a particle sees do
/// not depend on which thread runs it.
enum class StreamPurpose : std::uint64_t {
  kReference = 1,
  kPropagate = 2,
  kResample = 3,
  kFinal = 4,
  kExplore = 5,
  kAux = 6,
};

constexpr std::uint64_t stream_key(StreamPurpose purpose, std::uint64_t step, std::uint64_t particle) {
  return (static_cast<std::uint64_t>(purpose) << 56) | ((step & 0xFFFFFFu) << 32) |
         (particle & 0xFFFFFFFFu);
}

/// A seeded random stream. Identical (seed, stream) pairs reproduce identical draws.
/// Never share one stream between concurrent consumers.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double normal();
  /// Complex normal with unit total variance (1/2 per real component).
  std::complex<double> complex_normal();
  /// Gamma(shape, 1).
  double gamma(double shape);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace qscmc

#endif  // QSCMC_RNG_HPP
