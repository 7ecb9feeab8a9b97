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

// Linear SVM confidence scoring.
//
// Training solves   min_{w,b} 1/2 |w|^2 + C sum_i max(0, 1 - y_i (w.x_i + b))
// (bias not regularized) in the dual with pairwise coordinate updates that
// keep sum_i alpha_i y_i = 0. Scores are signed distances to the hyperplane,
// min-max normalized with bounds taken from the training set.
//
// Model file ("SVM1"), little-endian:
//   char[4] "SVM1" | u32 dim | f64 b | f64 C | f64 score_min | f64 score_max |
//   dim f64 w

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mmsent/codebook.hpp"
#include "mmsent/corpus.hpp"

namespace mmsent::classifier {

using codebook::Matrix;

struct LinearSvmModel {
  std::vector<double> w;
  double b = 0.0;
  double C = 1.0;
  double score_min = 0.0;
  double score_max = 1.0;

  std::size_t dim() const { return w.size(); }
  bool operator==(const LinearSvmModel&) const = default;
};

struct SolverOptions {
  int max_epochs = 1000;
  double tolerance = 1e-6;  // maximal KKT violation at exit
};

struct TrainReport {
  int epochs = 0;
  double kkt_gap = 0.0;
  bool converged = false;
};

/// Primal objective 1/2 |w|^2 + C sum hinge.
double Objective(std::span<const double> w, double b, double C, const Matrix& X,
                 std::span<const Label> y);

/// Hyperplane only: score_min/score_max are left at their defaults. Throws
/// PreconditionError for empty or single-class input and size mismatches.
LinearSvmModel TrainHyperplane(const Matrix& X, std::span<const Label> y, double C,
                               std::uint64_t seed, const SolverOptions& options = {},
                               TrainReport* report = nullptr);

/// Hyperplane plus normalization bounds from the training distances. Throws
/// PreconditionError when |w| = 0 or all training distances coincide.
LinearSvmModel TrainSvm(const Matrix& X, std::span<const Label> y, double C, std::uint64_t seed,
                        const SolverOptions& options = {}, TrainReport* report = nullptr);

/// (w.x + b) / |w|.
double DecisionDistance(const LinearSvmModel& model, std::span<const double> x);

/// Min-max normalization of a distance, clamped to [0, 1].
double NormalizeScore(const LinearSvmModel& model, double distance);

/// {2^e : e = lo..hi}.
std::vector<double> Log2Grid(int lo = -3, int hi = 15);

struct CvResult {
  double best_C = 0.0;
  std::vector<double> grid;
  std::vector<double> mean_accuracy;  // parallel to grid
};

/// Stratified k-fold cross-validation; the C with the highest mean fold
/// accuracy wins, ties going to the smaller C. Throws PreconditionError if a
/// class has fewer samples than folds.
CvResult CrossValidateC(const Matrix& X, std::span<const Label> y, std::span<const double> grid,
                        std::uint64_t seed, int folds = 5, int workers = 1,
                        const SolverOptions& options = {});

/// Fold index per sample: each class is shuffled with the seed and dealt
/// round-robin.
std::vector<int> StratifiedFolds(std::span<const Label> y, int folds, std::uint64_t seed);

std::string EncodeModel(const LinearSvmModel& model);
LinearSvmModel DecodeModel(std::string_view bytes, const std::string& context = "SVM1");
void WriteModel(const std::filesystem::path& path, const LinearSvmModel& model);
LinearSvmModel ReadModel(const std::filesystem::path& path);

}  // namespace mmsent::classifier
