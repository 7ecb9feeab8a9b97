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

#include "kernels_impl.hpp"

namespace mmsent::simd::scalar {

double Dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double WeightedSqDist(const double* x, const double* mean, const double* inv_var,
                      std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = x[i] - mean[i];
    s += d * d * inv_var[i];
  }
  return s;
}

void Axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void AccumulateMoments(double w, const double* x, double* sum, double* sumsq, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double wx = w * x[i];
    sum[i] += wx;
    sumsq[i] += wx * x[i];
  }
}

}  // namespace mmsent::simd::scalar
