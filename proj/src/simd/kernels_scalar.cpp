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

#include "qscmc/simd/kernels.hpp"

#include <algorithm>
#include <limits>

namespace qscmc::simd {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += x[i] * y[i];
  }
  return acc;
}

void affine_gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x,
                        const double* offset, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double base = offset != nullptr ? offset[r] : 0.0;
    y[r] = base + dot_scalar(a + r * cols, x, cols);
  }
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += x[i] * x[i];
  }
  return acc;
}

double max_value_scalar(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    m = std::max(m, x[i]);
  }
  return m;
}

void bridge_combine_scalar(const double* log_f, const double* log_g, std::size_t n, double tau,
                           double* out) {
  if (tau == 0.0) {
    std::copy(log_g, log_g + n, out);
    return;
  }
  if (tau == 1.0) {
    std::copy(log_f, log_f + n, out);
    return;
  }
  const double rest = 1.0 - tau;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = tau * log_f[i] + rest * log_g[i];
  }
}

void scale_scalar(double* x, std::size_t n, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    x[i] *= s;
  }
}

constexpr KernelTable kScalarTable{
    "scalar",           affine_gemv_scalar,    dot_scalar,   sum_squares_scalar,
    max_value_scalar,   bridge_combine_scalar, scale_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalarTable; }

}  // namespace qscmc::simd
