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

#include "mmsent/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmsent/binary_io.hpp"
#include "mmsent/error.hpp"
#include "mmsent/parallel.hpp"
#include "mmsent/rng.hpp"
#include "mmsent/simd.hpp"

namespace mmsent::classifier {

namespace {

constexpr std::size_t kGramCacheLimit = 4096;

void CheckTrainingInput(const Matrix& X, std::span<const Label> y) {
  if (X.rows == 0) throw PreconditionError("SVM training set is empty");
  if (X.rows != y.size()) throw PreconditionError("SVM: sample and label counts differ");
  if (X.rows < 2) throw PreconditionError("SVM training needs at least 2 samples");
  const bool has_pos = std::find(y.begin(), y.end(), Label::kPositive) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), Label::kNegative) != y.end();
  if (!has_pos || !has_neg) {
    throw PreconditionError(std::string("SVM training data contains only ") +
                            (has_pos ? "positive" : "negative") + " labels");
  }
}

// Kernel rows, either from a precomputed Gram matrix or on demand.
class LinearKernel {
 public:
  explicit LinearKernel(const Matrix& X) : X_(X) {
    if (X.rows <= kGramCacheLimit) {
      gram_.resize(X.rows * X.rows);
      for (std::size_t i = 0; i < X.rows; ++i) {
        for (std::size_t j = i; j < X.rows; ++j) {
          const double v = simd::Dot(X.row(i), X.row(j));
          gram_[i * X.rows + j] = v;
          gram_[j * X.rows + i] = v;
        }
      }
    }
  }

  double At(std::size_t i, std::size_t j) const {
    if (!gram_.empty()) return gram_[i * X_.rows + j];
    return simd::Dot(X_.row(i), X_.row(j));
  }

 private:
  const Matrix& X_;
  std::vector<double> gram_;
};

}  // namespace

double Objective(std::span<const double> w, double b, double C, const Matrix& X,
                 std::span<const Label> y) {
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < X.rows; ++i) {
    const double margin = Sign(y[i]) * (simd::Dot(w, X.row(i)) + b);
    loss += std::max(0.0, 1.0 - margin);
  }
  return 0.5 * reg + C * loss;
}

LinearSvmModel TrainHyperplane(const Matrix& X, std::span<const Label> y, double C,
                               std::uint64_t seed, const SolverOptions& options,
                               TrainReport* report) {
  CheckTrainingInput(X, y);
  if (!(C > 0.0) || !std::isfinite(C)) throw PreconditionError("C must be positive and finite");
  const std::size_t n = X.rows;
  const LinearKernel kernel(X);

  std::vector<double> yy(n), alpha(n, 0.0), f(n, 0.0);  // f[t] = w . x_t
  for (std::size_t i = 0; i < n; ++i) yy[i] = Sign(y[i]);

  // Dual view: v_t = y_t - f_t = -y_t * grad_t. Optimal when
  // max_{up} v <= min_{low} v (within tolerance).
  auto in_up = [&](std::size_t t) { return yy[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return yy[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };
  auto v = [&](std::size_t t) { return yy[t] - f[t]; };

  auto kkt_gap = [&] {
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t)) m = std::max(m, v(t));
      if (in_low(t)) M = std::min(M, v(t));
    }
    return std::pair{m, M};
  };

  // Moves alpha along (+y_i at i, -y_j at j); i must be in I_up, j in I_low.
  auto update_pair = [&](std::size_t i, std::size_t j) {
    const double viol = v(i) - v(j);
    if (!(viol > 0.0)) return false;
    const double curvature = kernel.At(i, i) + kernel.At(j, j) - 2.0 * kernel.At(i, j);
    double step_max_i = yy[i] > 0 ? C - alpha[i] : alpha[i];
    double step_max_j = yy[j] > 0 ? alpha[j] : C - alpha[j];
    double step = std::min(step_max_i, step_max_j);
    if (curvature > 0.0) step = std::min(step, viol / curvature);
    if (!(step > 0.0)) return false;
    alpha[i] = std::clamp(alpha[i] + yy[i] * step, 0.0, C);
    alpha[j] = std::clamp(alpha[j] - yy[j] * step, 0.0, C);
    for (std::size_t t = 0; t < n; ++t) f[t] += step * (kernel.At(i, t) - kernel.At(j, t));
    return true;
  };

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  TrainReport rep;
  auto [m, M] = kkt_gap();
  rep.kkt_gap = m - M;
  for (int epoch = 0; epoch < options.max_epochs && rep.kkt_gap > options.tolerance; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      // Most violating partner for i in each role it can take.
      std::size_t best_low = n, best_up = n;
      for (std::size_t t = 0; t < n; ++t) {
        if (in_low(t) && (best_low == n || v(t) < v(best_low))) best_low = t;
        if (in_up(t) && (best_up == n || v(t) > v(best_up))) best_up = t;
      }
      const double as_up = (in_up(i) && best_low != n) ? v(i) - v(best_low) : 0.0;
      const double as_low = (in_low(i) && best_up != n) ? v(best_up) - v(i) : 0.0;
      if (as_up <= options.tolerance && as_low <= options.tolerance) continue;
      if (as_up >= as_low) {
        update_pair(i, best_low);
      } else {
        update_pair(best_up, i);
      }
    }
    rep.epochs = epoch + 1;
    std::tie(m, M) = kkt_gap();
    rep.kkt_gap = m - M;
  }
  rep.converged = rep.kkt_gap <= options.tolerance;

  LinearSvmModel model;
  model.C = C;
  model.w.assign(X.cols, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] != 0.0) simd::Axpy(alpha[i] * yy[i], X.row(i), model.w);
  }
  // Bias from free support vectors (y_t (w.x_t + b) = 1), else the middle of
  // the feasible interval.
  for (std::size_t t = 0; t < n; ++t) f[t] = simd::Dot(model.w, X.row(t));
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < C) {
      free_sum += v(t);
      ++free_count;
    }
  }
  if (free_count > 0) {
    model.b = free_sum / static_cast<double>(free_count);
  } else {
    std::tie(m, M) = kkt_gap();
    model.b = 0.5 * (m + M);
  }
  if (report) *report = rep;
  return model;
}

LinearSvmModel TrainSvm(const Matrix& X, std::span<const Label> y, double C, std::uint64_t seed,
                        const SolverOptions& options, TrainReport* report) {
  LinearSvmModel model = TrainHyperplane(X, y, C, seed, options, report);
  double norm = std::sqrt(simd::Dot(model.w, model.w));
  if (!(norm > 0.0)) throw PreconditionError("trained SVM has a zero weight vector");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < X.rows; ++i) {
    const double d = DecisionDistance(model, X.row(i));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (!(hi > lo)) throw PreconditionError("training distances are all equal; cannot normalize");
  model.score_min = lo;
  model.score_max = hi;
  return model;
}

double DecisionDistance(const LinearSvmModel& model, std::span<const double> x) {
  if (x.size() != model.w.size()) {
    throw PreconditionError("feature dimension " + std::to_string(x.size()) +
                            " does not match model dimension " + std::to_string(model.w.size()));
  }
  const double norm = std::sqrt(simd::Dot(model.w, model.w));
  if (!(norm > 0.0)) throw PreconditionError("model has a zero weight vector");
  return (simd::Dot(model.w, x) + model.b) / norm;
}

double NormalizeScore(const LinearSvmModel& model, double distance) {
  const double range = model.score_max - model.score_min;
  if (!(range > 0.0)) throw PreconditionError("degenerate normalization bounds");
  return std::clamp((distance - model.score_min) / range, 0.0, 1.0);
}

std::vector<double> Log2Grid(int lo, int hi) {
  std::vector<double> grid;
  for (int e = lo; e <= hi; ++e) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

std::vector<int> StratifiedFolds(std::span<const Label> y, int folds, std::uint64_t seed) {
  if (folds < 2) throw PreconditionError("cross-validation needs at least 2 folds");
  std::vector<int> fold(y.size(), 0);
  for (Label cls : {Label::kPositive, Label::kNegative}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == cls) members.push_back(i);
    }
    if (members.size() < static_cast<std::size_t>(folds)) {
      throw PreconditionError(std::string("too few ") +
                              (cls == Label::kPositive ? "positive" : "negative") +
                              " samples (" + std::to_string(members.size()) + ") for " +
                              std::to_string(folds) + "-fold stratification");
    }
    Rng rng(DeriveSeed(seed, "fold", cls == Label::kPositive ? 1 : 0));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < members.size(); ++k) fold[members[k]] = static_cast<int>(k % folds);
  }
  return fold;
}

CvResult CrossValidateC(const Matrix& X, std::span<const Label> y, std::span<const double> grid,
                        std::uint64_t seed, int folds, int workers, const SolverOptions& options) {
  CheckTrainingInput(X, y);
  if (grid.empty()) throw PreconditionError("empty C grid");
  const auto fold_of = StratifiedFolds(y, folds, seed);

  struct Split {
    Matrix train_x, test_x;
    std::vector<Label> train_y, test_y;
  };
  std::vector<Split> splits(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    auto& s = splits[static_cast<std::size_t>(f)];
    std::size_t n_test = 0;
    for (int g : fold_of) n_test += (g == f);
    s.train_x = Matrix(X.rows - n_test, X.cols);
    s.test_x = Matrix(n_test, X.cols);
    std::size_t a = 0, b = 0;
    for (std::size_t i = 0; i < X.rows; ++i) {
      auto src = X.row(i);
      if (fold_of[i] == f) {
        std::copy(src.begin(), src.end(), s.test_x.row(b++).begin());
        s.test_y.push_back(y[i]);
      } else {
        std::copy(src.begin(), src.end(), s.train_x.row(a++).begin());
        s.train_y.push_back(y[i]);
      }
    }
  }

  const std::size_t n_tasks = grid.size() * static_cast<std::size_t>(folds);
  std::vector<double> accuracy(n_tasks, 0.0);
  ParallelFor(n_tasks, workers, [&](std::size_t task) {
    const std::size_t ci = task / static_cast<std::size_t>(folds);
    const auto& s = splits[task % static_cast<std::size_t>(folds)];
    auto model = TrainHyperplane(s.train_x, s.train_y, grid[ci], DeriveSeed(seed, "cv-train", task),
                                 options);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < s.test_x.rows; ++i) {
      const double score = simd::Dot(model.w, s.test_x.row(i)) + model.b;
      const Label pred = score > 0.0 ? Label::kPositive : Label::kNegative;
      correct += (pred == s.test_y[i]);
    }
    accuracy[task] = static_cast<double>(correct) / static_cast<double>(s.test_x.rows);
  });

  CvResult result;
  result.grid.assign(grid.begin(), grid.end());
  result.mean_accuracy.assign(grid.size(), 0.0);
  std::size_t best = 0;
  for (std::size_t ci = 0; ci < grid.size(); ++ci) {
    double sum = 0.0;
    for (int f = 0; f < folds; ++f) sum += accuracy[ci * static_cast<std::size_t>(folds) + f];
    result.mean_accuracy[ci] = sum / folds;
  }
  // Highest mean accuracy; ties go to the smaller C whatever the grid order.
  for (std::size_t ci = 1; ci < grid.size(); ++ci) {
    const double a = result.mean_accuracy[ci], b = result.mean_accuracy[best];
    if (a > b || (a == b && grid[ci] < grid[best])) best = ci;
  }
  result.best_C = grid[best];
  return result;
}

std::string EncodeModel(const LinearSvmModel& model) {
  io::ByteWriter w;
  w.Magic("SVM1");
  w.U32(static_cast<std::uint32_t>(model.w.size()));
  w.F64(model.b);
  w.F64(model.C);
  w.F64(model.score_min);
  w.F64(model.score_max);
  for (double v : model.w) w.F64(v);
  return w.data();
}

LinearSvmModel DecodeModel(std::string_view bytes, const std::string& context) {
  io::ByteReader r(bytes, context);
  r.ExpectMagic("SVM1");
  LinearSvmModel m;
  const auto dim = r.U32();
  m.b = r.F64();
  m.C = r.F64();
  m.score_min = r.F64();
  m.score_max = r.F64();
  if (r.remaining() != static_cast<std::size_t>(dim) * 8) {
    throw FormatError(context + ": size does not match dim");
  }
  m.w.resize(dim);
  for (auto& v : m.w) v = r.F64();
  if (!(m.score_max > m.score_min)) throw FormatError(context + ": degenerate score bounds");
  return m;
}

void WriteModel(const std::filesystem::path& path, const LinearSvmModel& model) {
  io::WriteFileAtomic(path, EncodeModel(model));
}

LinearSvmModel ReadModel(const std::filesystem::path& path) {
  return DecodeModel(io::ReadFile(path), path.string());
}

}  // namespace mmsent::classifier
