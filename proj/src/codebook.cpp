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

#include "mmsent/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "mmsent/binary_io.hpp"
#include "mmsent/error.hpp"
#include "mmsent/log.hpp"
#include "mmsent/parallel.hpp"
#include "mmsent/rng.hpp"
#include "mmsent/simd.hpp"

namespace mmsent::codebook {

namespace {

constexpr std::size_t kChunkRows = 2048;

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void Add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double LogSumExp(std::span<const double> v) {
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

Matrix ToMatrix(const DescriptorSet& set) {
  Matrix m(set.size(), set.dim());
  std::copy(set.values().begin(), set.values().end(), m.data.begin());
  return m;
}

GmmCodebook::GmmCodebook(Modality modality, std::uint32_t dim, std::vector<double> weights,
                         std::vector<double> means, std::vector<double> variances)
    : modality_(modality),
      dim_(dim),
      weights_(std::move(weights)),
      means_(std::move(means)),
      variances_(std::move(variances)) {
  const std::size_t k = weights_.size();
  if (dim_ == 0 || k == 0) throw PreconditionError("codebook needs K >= 1 and dim >= 1");
  if (means_.size() != k * dim_ || variances_.size() != k * dim_) {
    throw PreconditionError("codebook parameter shapes do not match K x dim");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw PreconditionError("codebook weights must be > 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("codebook weights must sum to 1");
  for (double v : variances_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError("codebook variances must be > 0");
  }
  for (double m : means_) {
    if (!std::isfinite(m)) throw PreconditionError("codebook means must be finite");
  }
  Precompute();
}

void GmmCodebook::Precompute() {
  const std::size_t k = weights_.size();
  log_const_.assign(k, 0.0);
  inv_var_.assign(variances_.size(), 0.0);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t c = 0; c < k; ++c) {
    double log_det = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      const double v = variances_[c * dim_ + d];
      log_det += std::log(v);
      inv_var_[c * dim_ + d] = 1.0 / v;
    }
    log_const_[c] = std::log(weights_[c]) - 0.5 * (dim_ * log_2pi + log_det);
  }
}

void GmmCodebook::ComponentLogJoint(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim_) throw PreconditionError("descriptor dimension does not match codebook");
  const auto& kernels = simd::Active();
  for (std::size_t c = 0; c < weights_.size(); ++c) {
    out[c] = log_const_[c] - 0.5 * kernels.weighted_sq_dist(x.data(), means_.data() + c * dim_,
                                                            inv_var_.data() + c * dim_, dim_);
  }
}

double GmmCodebook::Posteriors(std::span<const double> x, std::span<double> out) const {
  ComponentLogJoint(x, out);
  const double lse = LogSumExp(out);
  for (double& v : out) v = std::exp(v - lse);
  return lse;
}

BalancedSample SampleBalanced(const std::vector<std::pair<const DescriptorSet*, Label>>& sets,
                              std::size_t budget, std::uint64_t seed) {
  if (budget == 0 || budget % 2 != 0) {
    throw PreconditionError("sampling budget must be a positive even number");
  }
  std::uint32_t dim = 0;
  // Flat pools of (set index, row index) per class, in input order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pools[2];
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const DescriptorSet* set = sets[s].first;
    if (set == nullptr || set->empty()) continue;
    if (dim == 0) dim = set->dim();
    if (set->dim() != dim) throw PreconditionError("descriptor sets differ in dimension");
    auto& pool = pools[sets[s].second == Label::kPositive ? 0 : 1];
    for (std::size_t r = 0; r < set->size(); ++r) {
      pool.emplace_back(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(r));
    }
  }
  for (int c = 0; c < 2; ++c) {
    if (pools[c].empty()) {
      throw PreconditionError(std::string("no descriptors for the ") +
                              (c == 0 ? "positive" : "negative") + " class");
    }
  }

  BalancedSample out;
  out.per_class = budget / 2;
  out.data = Matrix(budget, dim);
  Rng rng(seed);
  std::size_t next_row = 0;
  for (int c = 0; c < 2; ++c) {
    const auto& pool = pools[c];
    std::vector<std::pair<std::uint32_t, std::uint32_t>> picked;
    picked.reserve(out.per_class);
    if (pool.size() >= out.per_class) {
      std::sample(pool.begin(), pool.end(), std::back_inserter(picked), out.per_class, rng);
    } else {
      out.with_replacement = true;
      log::Warn(std::string("class ") + (c == 0 ? "positive" : "negative") + " has only " +
                std::to_string(pool.size()) + " descriptors for a per-class budget of " +
                std::to_string(out.per_class) + "; sampling with replacement");
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      for (std::size_t i = 0; i < out.per_class; ++i) picked.push_back(pool[pick(rng)]);
    }
    for (const auto& [s, r] : picked) {
      auto src = sets[s].first->row(r);
      auto dst = out.data.row(next_row++);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return out;
}

namespace {

std::size_t CountDistinctRows(const Matrix& data, std::size_t stop_at) {
  std::vector<std::size_t> order(data.rows);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    auto ra = data.row(a), rb = data.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t distinct = data.rows == 0 ? 0 : 1;
  for (std::size_t i = 1; i < order.size() && distinct < stop_at; ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

double SqDist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Greedy k-means++ seeding (each step keeps the best of 2 + ln K sampled
// candidates) followed by Lloyd iterations. Returns K x dim centroids and each
// row's final assignment.
std::pair<Matrix, std::vector<std::uint32_t>> KMeans(const Matrix& data, std::uint32_t k,
                                                     int iters, Rng& rng) {
  const std::size_t n = data.rows, d = data.cols;
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  Matrix centers(k, d);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t chosen = first(rng);
  for (std::uint32_t c = 0; c < k; ++c) {
    auto src = data.row(chosen);
    std::copy(src.begin(), src.end(), centers.row(c).begin());
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], SqDist(data.row(i), centers.row(c)));
      total += nearest[i];
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double best_potential = std::numeric_limits<double>::infinity();
    chosen = n;
    for (int trial = 0; trial < trials; ++trial) {
      const double target = u(rng);
      std::size_t pick = n;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (nearest[i] > 0.0 && acc >= target) {
          pick = i;
          break;
        }
      }
      // Rounding at the end of the scan can skip every row; take the last
      // row that is not yet a centre.
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (nearest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
      double potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        potential += std::min(nearest[i], SqDist(data.row(i), data.row(pick)));
      }
      if (potential < best_potential) {
        best_potential = potential;
        chosen = pick;
      }
    }
  }

  std::vector<std::uint32_t> assign(n, 0);
  for (int it = 0; it <= iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = SqDist(data.row(i), centers.row(0));
      for (std::uint32_t c = 1; c < k; ++c) {
        double dist = SqDist(data.row(i), centers.row(c));
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      if (it == 0 || assign[i] != best) changed = true;
      assign[i] = best;
    }
    if (it == iters || !changed) break;
    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      simd::Axpy(1.0, data.row(i), sums.row(assign[i]));
      ++counts[assign[i]];
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // keep the previous centre
      auto dst = centers.row(c);
      auto src = sums.row(c);
      for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] / static_cast<double>(counts[c]);
    }
  }
  return {std::move(centers), std::move(assign)};
}

struct SufficientStats {
  std::vector<double> occupancy;  // K
  std::vector<double> sum;        // K x dim
  std::vector<double> sumsq;      // K x dim
  CompensatedSum loglik;

  SufficientStats(std::size_t k, std::size_t d) : occupancy(k, 0.0), sum(k * d, 0.0), sumsq(k * d, 0.0) {}
};

SufficientStats EStep(const GmmCodebook& gmm, const Matrix& data, int workers) {
  const std::size_t k = gmm.K(), d = gmm.dim();
  const std::size_t n_chunks = (data.rows + kChunkRows - 1) / kChunkRows;
  std::vector<SufficientStats> partial(n_chunks, SufficientStats(k, d));
  ParallelFor(n_chunks, workers, [&](std::size_t chunk) {
    auto& st = partial[chunk];
    std::vector<double> post(k);
    const auto& kernels = simd::Active();
    const std::size_t end = std::min(data.rows, (chunk + 1) * kChunkRows);
    for (std::size_t i = chunk * kChunkRows; i < end; ++i) {
      auto x = data.row(i);
      st.loglik.Add(gmm.Posteriors(x, post));
      for (std::size_t c = 0; c < k; ++c) {
        if (post[c] == 0.0) continue;
        st.occupancy[c] += post[c];
        kernels.accumulate_moments(post[c], x.data(), st.sum.data() + c * d,
                                   st.sumsq.data() + c * d, d);
      }
    }
  });
  // Fixed chunk order keeps the reduction independent of the worker count.
  SufficientStats total(k, d);
  for (const auto& st : partial) {
    for (std::size_t c = 0; c < k; ++c) total.occupancy[c] += st.occupancy[c];
    for (std::size_t j = 0; j < k * d; ++j) {
      total.sum[j] += st.sum[j];
      total.sumsq[j] += st.sumsq[j];
    }
    total.loglik.Add(st.loglik.value());
  }
  return total;
}

GmmCodebook MStep(const GmmCodebook& prev, const SufficientStats& st, double n_rows,
                  double floor) {
  const std::size_t k = prev.K(), d = prev.dim();
  std::vector<double> weights(k), means(prev.means()), vars(prev.variances());
  // A component that captured (numerically) nothing keeps its parameters and
  // a vanishing weight rather than dividing by zero.
  constexpr double kMinOccupancy = 1e-10;
  for (std::size_t c = 0; c < k; ++c) {
    const double occ = st.occupancy[c];
    weights[c] = std::max(occ, kMinOccupancy) / n_rows;
    if (occ < kMinOccupancy) continue;
    for (std::size_t j = 0; j < d; ++j) {
      const double mu = st.sum[c * d + j] / occ;
      const double var = st.sumsq[c * d + j] / occ - mu * mu;
      means[c * d + j] = mu;
      vars[c * d + j] = std::max(var, floor);
    }
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return GmmCodebook(prev.modality(), static_cast<std::uint32_t>(d), std::move(weights),
                     std::move(means), std::move(vars));
}

}  // namespace

GmmFit FitGmm(const Matrix& data, Modality modality, std::uint64_t seed, const FitOptions& opt) {
  const std::uint32_t k = opt.K;
  if (k == 0) throw PreconditionError("K must be at least 1");
  if (data.rows == 0 || data.cols == 0) throw PreconditionError("GMM training data is empty");
  if (data.rows < 10ULL * k) {
    throw PreconditionError("GMM training needs at least 10*K = " + std::to_string(10ULL * k) +
                            " rows, got " + std::to_string(data.rows));
  }
  for (double v : data.data) {
    if (!std::isfinite(v)) throw PreconditionError("GMM training data contains non-finite values");
  }
  const std::size_t n = data.rows, d = data.cols;

  // Per-dimension variance, for the floor.
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) simd::Axpy(1.0, data.row(i), mean);
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = data.row(i);
    for (std::size_t j = 0; j < d; ++j) var[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  }
  for (double& v : var) v /= static_cast<double>(n);
  const double mean_var = std::accumulate(var.begin(), var.end(), 0.0) / static_cast<double>(d);
  if (!(mean_var > 0.0)) throw PreconditionError("GMM training data has zero variance");
  const double floor = opt.variance_floor_scale * mean_var;
  if (CountDistinctRows(data, k) < k) {
    throw PreconditionError("K = " + std::to_string(k) + " exceeds the number of distinct rows");
  }

  Rng rng(seed);
  auto [centers, assign] = KMeans(data, k, opt.kmeans_iters, rng);

  std::vector<double> weights(k, 0.0), means(centers.data), vars(static_cast<std::size_t>(k) * d, 0.0);
  {
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = assign[i];
      counts[c] += 1.0;
      auto r = data.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = r[j] - means[c * d + j];
        vars[c * d + j] += diff * diff;
      }
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      weights[c] = std::max(counts[c], 1.0);
      for (std::size_t j = 0; j < d; ++j) {
        double v = counts[c] >= 2.0 ? vars[c * d + j] / counts[c] : var[j];
        vars[c * d + j] = std::max(v, floor);
      }
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= total;
  }

  GmmFit fit;
  fit.variance_floor = floor;
  GmmCodebook gmm(modality, static_cast<std::uint32_t>(d), std::move(weights), std::move(means),
                  std::move(vars));
  for (int iter = 0;; ++iter) {
    auto stats = EStep(gmm, data, opt.workers);
    const double ll = stats.loglik.value();
    fit.loglik_history.push_back(ll);
    if (iter >= 1) {
      const double prev = fit.loglik_history[fit.loglik_history.size() - 2];
      if ((ll - prev) < opt.tol * std::abs(prev)) break;
    }
    if (iter >= opt.max_iters) break;
    gmm = MStep(gmm, stats, static_cast<double>(n), floor);
  }
  fit.codebook = std::move(gmm);
  return fit;
}

double LogLikelihood(const GmmCodebook& codebook, const Matrix& data) {
  if (data.cols != codebook.dim() && data.rows > 0) {
    throw PreconditionError("data dimension does not match codebook");
  }
  std::vector<double> joint(codebook.K());
  CompensatedSum total;
  for (std::size_t i = 0; i < data.rows; ++i) {
    codebook.ComponentLogJoint(data.row(i), joint);
    total.Add(LogSumExp(joint));
  }
  return total.value();
}

MidLevelVector Encode(const GmmCodebook& codebook, const DescriptorSet& set) {
  MidLevelVector out;
  out.segment_id = set.segment_id();
  out.values.assign(codebook.K(), 0.0);
  if (set.empty()) {
    out.empty_input = true;
    return out;
  }
  if (set.dim() != codebook.dim()) {
    throw PreconditionError("segment " + set.segment_id() + ": descriptor dim " +
                            std::to_string(set.dim()) + " does not match codebook dim " +
                            std::to_string(codebook.dim()));
  }
  const std::size_t n = set.size(), k = codebook.K();
  // Component-major so each component's terms can be summed in sorted order.
  std::vector<double> post(k * n);
  std::vector<double> row(set.dim()), tmp(k);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = set.row(i);
    std::copy(src.begin(), src.end(), row.begin());
    codebook.Posteriors(row, tmp);
    for (std::size_t c = 0; c < k; ++c) post[c * n + i] = tmp[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto begin = post.begin() + static_cast<std::ptrdiff_t>(c * n);
    std::sort(begin, begin + static_cast<std::ptrdiff_t>(n));
    double s = 0.0;
    for (auto it = begin; it != begin + static_cast<std::ptrdiff_t>(n); ++it) s += *it;
    out.values[c] = s / static_cast<double>(n);
  }
  return out;
}

std::string EncodeCodebook(const GmmCodebook& cb) {
  io::ByteWriter w;
  w.Magic("GMM1");
  w.U32(cb.K());
  w.U32(cb.dim());
  w.U8(static_cast<std::uint8_t>(cb.modality()));
  for (double v : cb.weights()) w.F64(v);
  for (double v : cb.means()) w.F64(v);
  for (double v : cb.variances()) w.F64(v);
  return w.data();
}

GmmCodebook DecodeCodebook(std::string_view bytes, const std::string& context) {
  io::ByteReader r(bytes, context);
  r.ExpectMagic("GMM1");
  const auto k = r.U32();
  const auto d = r.U32();
  const auto tag = r.U8();
  if (tag > 1) throw FormatError(context + ": bad modality tag");
  const std::uint64_t expected = (static_cast<std::uint64_t>(k) + 2ULL * k * d) * 8ULL;
  if (r.remaining() != expected) throw FormatError(context + ": size does not match K and dim");
  std::vector<double> weights(k), means(static_cast<std::size_t>(k) * d), vars(means.size());
  for (auto& v : weights) v = r.F64();
  for (auto& v : means) v = r.F64();
  for (auto& v : vars) v = r.F64();
  try {
    return GmmCodebook(static_cast<Modality>(tag), d, std::move(weights), std::move(means),
                       std::move(vars));
  } catch (const PreconditionError& e) {
    throw FormatError(context + ": " + e.what());
  }
}

void WriteCodebook(const std::filesystem::path& path, const GmmCodebook& codebook) {
  io::WriteFileAtomic(path, EncodeCodebook(codebook));
}

GmmCodebook ReadCodebook(const std::filesystem::path& path) {
  return DecodeCodebook(io::ReadFile(path), path.string());
}

}  // namespace mmsent::codebook
