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

// Compiled with -mavx2 -mfma. Nothing in here may run before the dispatcher has checked
// the CPU flags.

#include "qscmc/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <limits>

namespace qscmc::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    acc += x[i] * y[i];
  }
  return acc;
}

void affine_gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x,
                      const double* offset, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double base = offset != nullptr ? offset[r] : 0.0;
    y[r] = base + dot_avx2(a + r * cols, x, cols);
  }
}

double sum_squares_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    s += x[i] * x[i];
  }
  return s;
}

double max_value_avx2(const double* x, std::size_t n) {
  const double ninf = -std::numeric_limits<double>::infinity();
  __m256d m = _mm256_set1_pd(ninf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m = _mm256_max_pd(m, _mm256_loadu_pd(x + i));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double best = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    best = std::max(best, x[i]);
  }
  return best;
}

void bridge_combine_avx2(const double* log_f, const double* log_g, std::size_t n, double tau,
                         double* out) {
  if (tau == 0.0) {
    std::copy(log_g, log_g + n, out);
    return;
  }
  if (tau == 1.0) {
    std::copy(log_f, log_f + n, out);
    return;
  }
  const __m256d t = _mm256_set1_pd(tau);
  const __m256d r = _mm256_set1_pd(1.0 - tau);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_mul_pd(r, _mm256_loadu_pd(log_g + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(t, _mm256_loadu_pd(log_f + i), g));
  }
  for (; i < n; ++i) {
    out[i] = tau * log_f[i] + (1.0 - tau) * log_g[i];
  }
}

void scale_avx2(double* x, std::size_t n, double s) {
  const __m256d v = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(v, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) {
    x[i] *= s;
  }
}

constexpr KernelTable kAvx2Table{
    "avx2",         affine_gemv_avx2,    dot_avx2,   sum_squares_avx2,
    max_value_avx2, bridge_combine_avx2, scale_avx2,
};

}  // namespace

const KernelTable* avx2_kernels() noexcept { return &kAvx2Table; }

}  // namespace qscmc::simd
