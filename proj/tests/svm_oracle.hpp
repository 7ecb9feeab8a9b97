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

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mmsent/codebook.hpp"
#include "mmsent/corpus.hpp"

namespace mmsent::testing {

inline double PrimalObjective(const std::vector<double>& w, double b, double C,
                              const codebook::Matrix& X, std::span<const Label> y) {
  double obj = 0.0;
  for (double v : w) obj += 0.5 * v * v;
  for (std::size_t i = 0; i < X.rows; ++i) {
    double f = b;
    for (std::size_t j = 0; j < X.cols; ++j) f += w[j] * X.row(i)[j];
    obj += C * std::max(0.0, 1.0 - Sign(y[i]) * f);
  }
  return obj;
}

/// Best primal objective reached by projected-free subgradient descent on
/// (w, b) with a 1/sqrt(t) step schedule and restarts from the incumbent.
inline double SubgradientOracle(const codebook::Matrix& X, std::span<const Label> y, double C,
                                int rounds = 6, int iters = 200000) {
  const std::size_t d = X.cols;
  std::vector<double> w(d, 0.0), best_w = w, g(d);
  double b = 0.0, best_b = 0.0;
  double best = PrimalObjective(w, b, C, X, y);
  double scale = 1.0;
  for (std::size_t i = 0; i < X.rows; ++i) {
    double n = 0.0;
    for (std::size_t j = 0; j < d; ++j) n += X.row(i)[j] * X.row(i)[j];
    scale = std::max(scale, C * X.rows * (1.0 + std::sqrt(n)));
  }
  for (int round = 0; round < rounds; ++round) {
    w = best_w;
    b = best_b;
    const double eta0 = 1.0 / (scale * std::pow(4.0, round));
    for (int t = 1; t <= iters; ++t) {
      g = w;
      double gb = 0.0;
      for (std::size_t i = 0; i < X.rows; ++i) {
        double f = b;
        for (std::size_t j = 0; j < d; ++j) f += w[j] * X.row(i)[j];
        const double yi = Sign(y[i]);
        if (yi * f < 1.0) {
          for (std::size_t j = 0; j < d; ++j) g[j] -= C * yi * X.row(i)[j];
          gb -= C * yi;
        }
      }
      const double eta = eta0 / std::sqrt(static_cast<double>(t));
      for (std::size_t j = 0; j < d; ++j) w[j] -= eta * g[j];
      b -= eta * gb;
      const double obj = PrimalObjective(w, b, C, X, y);
      if (obj < best) {
        best = obj;
        best_w = w;
        best_b = b;
      }
    }
  }
  return best;
}

}  // namespace mmsent::testing
