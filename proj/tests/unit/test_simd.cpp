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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <doctest.h>

#include "qscmc/simd/kernels.hpp"

using namespace qscmc::simd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> random_vector(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> d(0.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) {
    x = d(gen);
  }
  return v;
}

bool close(double a, double b, double scale) {
  if (std::isinf(a) || std::isinf(b)) {
    return a == b;
  }
  return std::abs(a - b) <= 1e-12 * (1.0 + scale);
}

/// Checks one table against plain loops for lengths covering every tail size.
void check_table(const KernelTable& k) {
  INFO(k.name);
  std::mt19937_64 gen(61);
  for (std::size_t n = 0; n <= 37; ++n) {
    const auto x = random_vector(n, gen);
    const auto y = random_vector(n, gen);
    double dot = 0.0;
    double ss = 0.0;
    double mx = -kInf;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += x[i] * y[i];
      ss += x[i] * x[i];
      mx = std::max(mx, x[i]);
      scale += std::abs(x[i] * y[i]);
    }
    CHECK(close(k.dot(x.data(), y.data(), n), dot, scale));
    CHECK(close(k.sum_squares(x.data(), n), ss, ss));
    CHECK(k.max_value(x.data(), n) == mx);

    for (double tau : {0.0, 0.3, 1.0}) {
      auto f = x;
      auto g = y;
      if (n > 3) {
        f[1] = -kInf;
        g[2] = -kInf;
      }
      std::vector<double> out(n);
      k.bridge_combine(f.data(), g.data(), n, tau, out.data());
      for (std::size_t i = 0; i < n; ++i) {
        double expected = 0.0;
        if (tau > 0.0) {
          expected += tau * f[i];
        }
        if (tau < 1.0) {
          expected += (1.0 - tau) * g[i];
        }
        CHECK(!std::isnan(out[i]));
        CHECK(close(out[i], expected, std::abs(f[i]) + std::abs(g[i])));
      }
    }

    auto scaled = x;
    k.scale(scaled.data(), n, -1.75);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(scaled[i] == -1.75 * x[i]);
    }
  }

  for (std::size_t rows : {1, 3, 8, 9}) {
    for (std::size_t cols : {1, 4, 5, 80}) {
      const auto a = random_vector(rows * cols, gen);
      const auto v = random_vector(cols, gen);
      const auto offset = random_vector(rows, gen);
      std::vector<double> out(rows);
      std::vector<double> bare(rows);
      k.affine_gemv(a.data(), rows, cols, v.data(), offset.data(), out.data());
      k.affine_gemv(a.data(), rows, cols, v.data(), nullptr, bare.data());
      for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        double scale = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          sum += a[r * cols + c] * v[c];
          scale += std::abs(a[r * cols + c] * v[c]);
        }
        CHECK(close(bare[r], sum, scale));
        CHECK(close(out[r], offset[r] + sum, scale + std::abs(offset[r])));
      }
    }
  }

  const std::vector<double> dead(9, -kInf);
  CHECK(k.max_value(dead.data(), dead.size()) == -kInf);
  CHECK(k.max_value(nullptr, 0) == -kInf);
}

}  // namespace

TEST_CASE("scalar kernels match plain loops") { check_table(scalar_kernels()); }

TEST_CASE("vector kernels match plain loops") {
  const KernelTable* avx2 = avx2_kernels();
  if (avx2 == nullptr || !cpu_supports_avx2()) {
    MESSAGE("AVX2 table unavailable on this build or CPU");
    return;
  }
  check_table(*avx2);
}

TEST_CASE("active table is one of the known tables") {
  const KernelTable& active = active_kernels();
  CHECK((&active == &scalar_kernels() || &active == avx2_kernels()));
}
