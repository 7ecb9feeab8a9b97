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

// Data-parallel inner loops used by the codebook (E/M steps, encoding) and the
// classifier (dot products). Each kernel has a scalar reference and optional
// AVX2/NEON variants; one table is picked at first use from the host CPU.
//
// Setting MMSENT_SIMD=scalar|avx2|neon in the environment overrides the
// choice (unsupported requests fall back to scalar).
//
// Variants agree with the scalar reference up to summation-order rounding,
// which tests pin at 1e-12 relative. A given table is deterministic, so runs
// on one machine are bit-reproducible.

#pragma once

#include <cstddef>
#include <span>

namespace mmsent::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  const char* name;

  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  /// sum_i (x[i] - mean[i])^2 * inv_var[i]
  double (*weighted_sq_dist)(const double* x, const double* mean, const double* inv_var,
                             std::size_t n);

  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// sum[i] += w * x[i]; sumsq[i] += w * x[i]^2
  void (*accumulate_moments)(double w, const double* x, double* sum, double* sumsq,
                             std::size_t n);
};

const KernelTable& Scalar();
/// nullptr when the build or the CPU lacks the extension.
const KernelTable* Avx2();
const KernelTable* Neon();

/// The table chosen for this process.
const KernelTable& Active();

inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Active().dot(a.data(), b.data(), a.size());
}

inline double WeightedSqDist(std::span<const double> x, std::span<const double> mean,
                             std::span<const double> inv_var) {
  return Active().weighted_sq_dist(x.data(), mean.data(), inv_var.data(), x.size());
}

inline void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  Active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void AccumulateMoments(double w, std::span<const double> x, std::span<double> sum,
                              std::span<double> sumsq) {
  Active().accumulate_moments(w, x.data(), sum.data(), sumsq.data(), x.size());
}

}  // namespace mmsent::simd
