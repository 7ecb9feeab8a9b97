// Copyright 2026 The mmsent Authors
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

#include "kernels_impl.hpp"
#include "mmsent/simd.hpp"

namespace mmsent::simd {

namespace {

const KernelTable kScalarTable{Isa::kScalar, "scalar", &scalar::Dot, &scalar::WeightedSqDist,
                               &scalar::Axpy, &scalar::AccumulateMoments};

#if defined(MMSENT_HAVE_AVX2)
const KernelTable kAvx2Table{Isa::kAvx2, "avx2", &avx2::Dot, &avx2::WeightedSqDist,
                             &avx2::Axpy, &avx2::AccumulateMoments};
#endif

#if defined(MMSENT_HAVE_NEON)
const KernelTable kNeonTable{Isa::kNeon, "neon", &neon::Dot, &neon::WeightedSqDist,
                             &neon::Axpy, &neon::AccumulateMoments};
#endif

const KernelTable& Select() {
  const char* env = std::getenv("MMSENT_SIMD");
  std::string_view want = env ? env : "auto";
  if (want == "scalar") return kScalarTable;
  if (want == "avx2") return Avx2() ? *Avx2() : kScalarTable;
  if (want == "neon") return Neon() ? *Neon() : kScalarTable;
  if (const auto* t = Avx2()) return *t;
  if (const auto* t = Neon()) return *t;
  return kScalarTable;
}

}  // namespace

const KernelTable& Scalar() { return kScalarTable; }

const KernelTable* Avx2() {
#if defined(MMSENT_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* Neon() {
#if defined(MMSENT_HAVE_NEON)
  return &kNeonTable;
#else
  return nullptr;
#endif
}

const KernelTable& Active() {
  static const KernelTable& table = Select();
  return table;
}

}  // namespace mmsent::simd
