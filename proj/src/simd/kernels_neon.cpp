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

// AArch64 Advanced SIMD (always present on that architecture).

#include "kernels_impl.hpp"

#if defined(MMSENT_HAVE_NEON)

#include <arm_neon.h>

namespace mmsent::simd::neon {

double Dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double WeightedSqDist(const double* x, const double* mean, const double* inv_var,
                      std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(mean + i));
    acc = vfmaq_f64(acc, vmulq_f64(d, d), vld1q_f64(inv_var + i));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    double d = x[i] - mean[i];
    s += d * d * inv_var[i];
  }
  return s;
}

void Axpy(double alpha, const double* x, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void AccumulateMoments(double w, const double* x, double* sum, double* sumsq, std::size_t n) {
  float64x2_t vw = vdupq_n_f64(w);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vx = vld1q_f64(x + i);
    float64x2_t wx = vmulq_f64(vw, vx);
    vst1q_f64(sum + i, vaddq_f64(vld1q_f64(sum + i), wx));
    vst1q_f64(sumsq + i, vfmaq_f64(vld1q_f64(sumsq + i), wx, vx));
  }
  for (; i < n; ++i) {
    double wx = w * x[i];
    sum[i] += wx;
    sumsq[i] += wx * x[i];
  }
}

}  // namespace mmsent::simd::neon

#endif  // MMSENT_HAVE_NEON
