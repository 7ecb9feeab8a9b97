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

// Mid-level encoding: a diagonal-covariance Gaussian mixture trained with EM
// on class-balanced descriptor samples acts as a soft vocabulary; a segment is
// encoded as the average of its descriptors' component posteriors.
//
// Codebook file ("GMM1"), little-endian:
//   char[4] "GMM1" | u32 K | u32 dim | u8 modality (0 audio, 1 video) |
//   K f64 weights | K*dim f64 means | K*dim f64 variances

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmsent/corpus.hpp"
#include "mmsent/descriptors.hpp"

namespace mmsent::codebook {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

/// Copies every descriptor of the set into a matrix of doubles.
Matrix ToMatrix(const DescriptorSet& set);

class GmmCodebook {
 public:
  GmmCodebook() = default;
  /// Validates: weights positive and summing to 1 within 1e-9, variances
  /// positive, shapes consistent.
  GmmCodebook(Modality modality, std::uint32_t dim, std::vector<double> weights,
              std::vector<double> means, std::vector<double> variances);

  std::uint32_t K() const { return static_cast<std::uint32_t>(weights_.size()); }
  std::uint32_t dim() const { return dim_; }
  Modality modality() const { return modality_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& variances() const { return variances_; }
  std::span<const double> mean(std::size_t k) const { return {means_.data() + k * dim_, dim_}; }
  std::span<const double> variance(std::size_t k) const {
    return {variances_.data() + k * dim_, dim_};
  }

  /// log(w_k) + log N(x; mean_k, diag(var_k)) for every component.
  void ComponentLogJoint(std::span<const double> x, std::span<double> out) const;

  /// Posterior over components for one descriptor; returns log p(x).
  double Posteriors(std::span<const double> x, std::span<double> out) const;

  bool operator==(const GmmCodebook& o) const {
    return modality_ == o.modality_ && dim_ == o.dim_ && weights_ == o.weights_ &&
           means_ == o.means_ && variances_ == o.variances_;
  }

 private:
  void Precompute();

  Modality modality_ = Modality::kAudio;
  std::uint32_t dim_ = 0;
  std::vector<double> weights_;
  std::vector<double> means_;
  std::vector<double> variances_;
  // Cached: log weight + Gaussian normalizer, and 1/variance.
  std::vector<double> log_const_;
  std::vector<double> inv_var_;
};

struct BalancedSample {
  Matrix data;            // positive-class rows first, then negative
  std::size_t per_class = 0;
  bool with_replacement = false;
};

/// Draws budget/2 descriptors from each class, pooled over all segments of
/// that class. A class with fewer than budget/2 descriptors is sampled with
/// replacement (logged). Throws PreconditionError when the budget is odd or
/// zero, or a class has no descriptors.
BalancedSample SampleBalanced(const std::vector<std::pair<const DescriptorSet*, Label>>& sets,
                              std::size_t budget, std::uint64_t seed);

struct FitOptions {
  std::uint32_t K = 256;
  int max_iters = 100;
  double tol = 1e-5;  // relative log-likelihood gain
  int kmeans_iters = 10;
  double variance_floor_scale = 1e-4;  // times mean per-dimension data variance
  int workers = 1;
};

struct GmmFit {
  GmmCodebook codebook;
  /// Total log-likelihood of the data under each successive parameter set;
  /// the last entry belongs to the returned codebook.
  std::vector<double> loglik_history;
  double variance_floor = 0.0;
};

/// k-means++ seeding, k-means refinement, then EM. Throws PreconditionError
/// for empty or zero-variance data, fewer than 10*K rows, or fewer than K
/// distinct rows.
GmmFit FitGmm(const Matrix& data, Modality modality, std::uint64_t seed,
              const FitOptions& options = {});

/// Sum over rows of log sum_k w_k N(row; mean_k, var_k), via log-sum-exp.
double LogLikelihood(const GmmCodebook& codebook, const Matrix& data);

struct MidLevelVector {
  std::string segment_id;
  std::vector<double> values;
  bool empty_input = false;  // true when encoded from an empty DescriptorSet
};

/// Average soft-assignment posterior over the set's descriptors. Independent
/// of row order (per-component sums run over sorted terms). Empty sets give
/// the all-zero vector with empty_input set.
MidLevelVector Encode(const GmmCodebook& codebook, const DescriptorSet& set);

std::string EncodeCodebook(const GmmCodebook& codebook);
GmmCodebook DecodeCodebook(std::string_view bytes, const std::string& context = "GMM1");
void WriteCodebook(const std::filesystem::path& path, const GmmCodebook& codebook);
GmmCodebook ReadCodebook(const std::filesystem::path& path);

}  // namespace mmsent::codebook
