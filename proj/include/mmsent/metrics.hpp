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

// Evaluation metrics for binary polarity and continuous sentiment.
//
// Undefined quantities (no predicted positives, constant correlation inputs)
// are reported as 0 with a flag instead of raising.

#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "mmsent/corpus.hpp"

namespace mmsent::metrics {

struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws PreconditionError on length mismatch or empty input.
ConfusionMatrix Confusion(std::span<const Label> predicted, std::span<const Label> truth);

/// Rows are actual classes, columns predicted, both axes labeled.
std::string FormatConfusion(const ConfusionMatrix& cm);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // tp + fp == 0
  bool recall_undefined = false;     // tp + fn == 0
  bool f1_undefined = false;         // precision + recall == 0

  bool degenerate() const { return precision_undefined || recall_undefined || f1_undefined; }
};

Prf1 PrecisionRecallF1(const ConfusionMatrix& cm);

/// Confidence in [0, 1] to sentiment in [-3, 3] via 6c - 3. Throws
/// PreconditionError outside [0, 1].
double ScaleConfidence(double confidence);
/// (s + 3) / 6.
double UnscaleSentiment(double sentiment);

/// Mean absolute error. Throws on length mismatch or empty input.
double MeanAbsoluteError(std::span<const double> predicted, std::span<const double> truth);

struct Correlation {
  double value = 0.0;
  bool undefined = false;  // one input is constant
};

/// Sample Pearson correlation. Throws on length mismatch or fewer than 2 values.
Correlation Pearson(std::span<const double> predicted, std::span<const double> truth);

/// Class index of a sentiment value: 7 classes round to the nearest integer
/// in [-3, 3]; 5 classes clamp to [-2, 2] first. Halves round away from 0.
int SentimentClass(double sentiment, int classes);

/// Mean per-class recall over the classes present in truth. classes is 5 or 7.
double MulticlassAccuracy(std::span<const double> predicted, std::span<const double> truth,
                          int classes);

struct BinaryAccuracy {
  double plain = 0.0;     // (tp + tn) / total
  double weighted = 0.0;  // mean of the per-class recalls present in truth
};

BinaryAccuracy BinaryAccuracies(std::span<const Label> predicted, std::span<const Label> truth);

struct MetricReport {
  std::string name;
  std::size_t count = 0;
  ConfusionMatrix confusion;
  Prf1 prf1;
  double mae = 0.0;
  Correlation correlation;
  BinaryAccuracy binary;
  double acc5 = 0.0;
  double acc7 = 0.0;
};

/// confidence: fused or unimodal scores in [0, 1]; predicted: the labels
/// produced from them; truth: ground-truth sentiment in [-3, 3].
MetricReport BuildReport(std::string name, std::span<const double> confidence,
                         std::span<const Label> predicted, std::span<const double> truth);

/// Flat key=value lines, keys prefixed with the report name.
std::string ToKeyValue(const MetricReport& report);
/// Pretty-printed JSON object.
std::string ToJson(const MetricReport& report);

}  // namespace mmsent::metrics
