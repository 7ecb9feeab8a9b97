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

// Per-ISA kernel entry points. Each namespace lives in its own translation
// unit so that only that file is compiled with the extension enabled.

#pragma once

#include <cstddef>

namespace mmsent::simd {

#define MMSENT_DECLARE_KERNELS                                                              \
  double Dot(const double* a, const double* b, std::size_t n);                              \
  double WeightedSqDist(const double* x, const double* mean, const double* inv_var,         \
                        std::size_t n);                                                     \
  void Axpy(double alpha, const double* x, double* y, std::size_t n);                       \
  void AccumulateMoments(double w, const double* x, double* sum, double* sumsq, std::size_t n);

namespace scalar {
MMSENT_DECLARE_KERNELS
}
namespace avx2 {
MMSENT_DECLARE_KERNELS
}
namespace neon {
MMSENT_DECLARE_KERNELS
}

#undef MMSENT_DECLARE_KERNELS

}  // namespace mmsent::simd
