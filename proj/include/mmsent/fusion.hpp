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

// Late fusion of per-modality confidence scores.
//
// Score level: fused = theta * video + (1 - theta) * audio, positive iff
// fused > threshold(theta). Output level: each score is quantized to
// {-1, 0, +1} by thirds of [0, 1], the two are summed and mapped onto
// {0, .25, .5, .75, 1}, positive iff > 0.5.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmsent/corpus.hpp"

namespace mmsent::fusion {

struct ScorePair {
  std::string segment_id;
  double video = 0.0;  // confidence in [0, 1]
  double audio = 0.0;  // confidence in [0, 1]
  std::optional<Label> truth;
};

/// Video weight in [0, 1]; audio gets 1 - theta.
class FusionWeight {
 public:
  /// Throws PreconditionError outside [0, 1].
  explicit FusionWeight(double theta);
  double value() const { return theta_; }

 private:
  double theta_;
};

enum class ThresholdRule {
  kOneMinusTheta,  // threshold = 1 - theta (0.5 at equal weights)
  kFixedHalf,      // threshold = 0.5 for every theta
};

std::string_view ThresholdRuleName(ThresholdRule rule);
ThresholdRule ParseThresholdRule(std::string_view token);

struct FusedPrediction {
  double fused_score = 0.0;
  Label label = Label::kNegative;
};

double FusionThreshold(FusionWeight theta, ThresholdRule rule = ThresholdRule::kOneMinusTheta);

FusedPrediction ScoreLevelFuse(const ScorePair& pair, FusionWeight theta,
                               ThresholdRule rule = ThresholdRule::kOneMinusTheta);

/// -1 below 1/3, 0 below 2/3, +1 otherwise.
int Ternarize(double score);

FusedPrediction OutputLevelFuse(const ScorePair& pair);

/// Mean over the two classes of the per-class error rate. Throws
/// PreconditionError on length mismatch or when a class is absent from truth.
double ClassificationError(std::span<const Label> truth, std::span<const Label> predicted);

/// {0, 0.2, 0.4, 0.6, 0.8, 1}.
std::vector<double> ThetaGrid();

struct ThetaSearch {
  double best = 0.5;
  std::vector<double> grid;
  std::vector<double> errors;  // parallel to grid
};

/// Exhaustive search minimizing ClassificationError of ScoreLevelFuse over
/// the grid. Ties go to the theta nearest 0.5, then to the larger theta.
/// Every pair needs a truth label.
ThetaSearch GridSearchTheta(std::span<const ScorePair> pairs,
                            ThresholdRule rule = ThresholdRule::kOneMinusTheta,
                            std::span<const double> grid = {});

}  // namespace mmsent::fusion
