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

#include "mmsent/fusion.hpp"

#include <cmath>
#include <cstdint>

#include "mmsent/error.hpp"

namespace mmsent::fusion {

FusionWeight::FusionWeight(double theta) : theta_(theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw PreconditionError("fusion weight must lie in [0, 1], got " + std::to_string(theta));
  }
}

std::string_view ThresholdRuleName(ThresholdRule rule) {
  return rule == ThresholdRule::kOneMinusTheta ? "one-minus-theta" : "fixed-half";
}

ThresholdRule ParseThresholdRule(std::string_view token) {
  if (token == "one-minus-theta") return ThresholdRule::kOneMinusTheta;
  if (token == "fixed-half") return ThresholdRule::kFixedHalf;
  throw PreconditionError("unknown threshold rule \"" + std::string(token) + "\"");
}

double FusionThreshold(FusionWeight theta, ThresholdRule rule) {
  return rule == ThresholdRule::kOneMinusTheta ? 1.0 - theta.value() : 0.5;
}

FusedPrediction ScoreLevelFuse(const ScorePair& pair, FusionWeight theta, ThresholdRule rule) {
  const double t = theta.value();
  FusedPrediction out;
  out.fused_score = t * pair.video + (1.0 - t) * pair.audio;
  out.label = out.fused_score > FusionThreshold(theta, rule) ? Label::kPositive : Label::kNegative;
  return out;
}

int Ternarize(double score) {
  if (score < 1.0 / 3.0) return -1;
  if (score < 2.0 / 3.0) return 0;
  return 1;
}

FusedPrediction OutputLevelFuse(const ScorePair& pair) {
  FusedPrediction out;
  out.fused_score = (Ternarize(pair.video) + Ternarize(pair.audio) + 2) / 4.0;
  out.label = out.fused_score > 0.5 ? Label::kPositive : Label::kNegative;
  return out;
}

namespace {

struct ErrorCounts {
  std::uint64_t pos = 0, neg = 0, pos_wrong = 0, neg_wrong = 0;

  double Rate() const {
    return 0.5 * (static_cast<double>(pos_wrong) / static_cast<double>(pos) +
                  static_cast<double>(neg_wrong) / static_cast<double>(neg));
  }
  // Numerator over the common denominator 2 * pos * neg; exact comparisons.
  unsigned __int128 Scaled() const {
    return static_cast<unsigned __int128>(pos_wrong) * neg +
           static_cast<unsigned __int128>(neg_wrong) * pos;
  }
};

ErrorCounts CountErrors(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) {
    throw PreconditionError("truth and prediction lengths differ");
  }
  ErrorCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool wrong = truth[i] != predicted[i];
    if (truth[i] == Label::kPositive) {
      ++c.pos;
      c.pos_wrong += wrong;
    } else {
      ++c.neg;
      c.neg_wrong += wrong;
    }
  }
  if (c.pos == 0 || c.neg == 0) {
    throw PreconditionError(std::string("classification error needs both classes; no ") +
                            (c.pos == 0 ? "positive" : "negative") + " samples in ground truth");
  }
  return c;
}

}  // namespace

double ClassificationError(std::span<const Label> truth, std::span<const Label> predicted) {
  return CountErrors(truth, predicted).Rate();
}

std::vector<double> ThetaGrid() {
  std::vector<double> grid;
  for (int i = 0; i <= 5; ++i) grid.push_back(i / 5.0);
  return grid;
}

ThetaSearch GridSearchTheta(std::span<const ScorePair> pairs, ThresholdRule rule,
                            std::span<const double> grid_in) {
  ThetaSearch out;
  out.grid = grid_in.empty() ? ThetaGrid() : std::vector<double>(grid_in.begin(), grid_in.end());
  std::vector<Label> truth;
  truth.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.truth) throw PreconditionError("theta search needs ground truth for " + p.segment_id);
    truth.push_back(*p.truth);
  }
  std::vector<ErrorCounts> counts;
  std::vector<Label> pred(pairs.size());
  for (double theta : out.grid) {
    const FusionWeight w(theta);
    for (std::size_t i = 0; i < pairs.size(); ++i) pred[i] = ScoreLevelFuse(pairs[i], w, rule).label;
    counts.push_back(CountErrors(truth, pred));
    out.errors.push_back(counts.back().Rate());
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.grid.size(); ++i) {
    const auto a = counts[i].Scaled(), b = counts[best].Scaled();
    if (a < b) {
      best = i;
    } else if (a == b) {
      const double da = std::abs(out.grid[i] - 0.5), db = std::abs(out.grid[best] - 0.5);
      // Grid points are multiples of 0.2, so distances differ by far more
      // than rounding when they differ at all.
      if (da < db - 1e-12 || (std::abs(da - db) <= 1e-12 && out.grid[i] > out.grid[best])) best = i;
    }
  }
  out.best = out.grid[best];
  return out;
}

}  // namespace mmsent::fusion
