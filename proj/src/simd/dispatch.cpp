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

#include <cstdlib>
#include <string_view>

#include "qscmc/simd/kernels.hpp"

namespace qscmc::simd {

#ifndef QSCMC_HAVE_AVX2
const KernelTable* avx2_kernels() noexcept { return nullptr; }
#endif

bool cpu_supports_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& select_kernels() noexcept {
  if (const char* forced = std::getenv("QSCMC_SIMD"); forced != nullptr) {
    if (std::string_view{forced} == "scalar") {
      return scalar_kernels();
    }
  }
  if (const KernelTable* avx2 = avx2_kernels(); avx2 != nullptr && cpu_supports_avx2()) {
    return *avx2;
  }
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() noexcept {
  static const KernelTable& table = select_kernels();
  return table;
}

}  // namespace qscmc::simd
