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

#ifndef QSCMC_SIMD_KERNELS_HPP
#define QSCMC_SIMD_KERNELS_HPP

#include <cstddef>

/**
 * \file
 * \brief Data-parallel arithmetic kernels with a scalar reference and an AVX2/FMA variant.
 *
 * The variant is chosen once per process: AVX2 when the CPU reports both AVX2 and FMA,
 * scalar otherwise. Setting the environment variable `QSCMC_SIMD=scalar` forces the
 * scalar table. The two variants agree to rounding (summation order differs), so runs are
 * reproducible for a fixed variant on a fixed machine.
 */

namespace qscmc::simd {

struct KernelTable {
  const char* name;

  /// y = offset + A x, with A row-major `rows x cols`. `offset` may be null.
  void (*affine_gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x,
                      const double* offset, double* y);

  double (*dot)(const double* x, const double* y, std::size_t n);

  double (*sum_squares)(const double* x, std::size_t n);

  /// Largest element; -inf for an empty range or an all -inf range.
  double (*max_value)(const double* x, std::size_t n);

  /// out = tau * log_f + (1 - tau) * log_g, where a zero exponent drops its term entirely
  /// (so -inf times zero never produces NaN).
  void (*bridge_combine)(const double* log_f, const double* log_g, std::size_t n, double tau,
                         double* out);

  /// x *= s
  void (*scale)(double* x, std::size_t n, double s);
};

const KernelTable& scalar_kernels() noexcept;

/// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels() noexcept;

/// Whether the running CPU can execute the AVX2 table.
bool cpu_supports_avx2() noexcept;

/// The table selected for this process.
const KernelTable& active_kernels() noexcept;

}  // namespace qscmc::simd

#endif  // QSCMC_SIMD_KERNELS_HPP
