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

// Stage runners. Stages hand off through files under one output directory:
//
//   descriptors/<modality>/<id>.dsc     per-segment descriptors
//   descriptors/<modality>/stamp.json   descriptor config hash
//   models/<modality>.gmm|.svm|.json    codebook, classifier, training record
//   models/theta.json                   selected fusion weight and search trace
//   scores/<split>.scores.txt           "<id> <modality> <score>" lines
//   predictions/<split>.fused.txt       "<id> <fused> <label>" lines
//   predictions/predict.tsv             predict output
//   reports/<split>.txt|.json           metric reports
//   reports/<split>.confusion.txt       confusion matrices
//   run_manifest.json                   per-stage config hashes and times
//
// Every artifact except run_manifest.json's timestamps is a pure function of
// the inputs, the configuration and the seed.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmsent/config.hpp"
#include "mmsent/corpus.hpp"
#include "mmsent/error.hpp"
#include "mmsent/metrics.hpp"

namespace mmsent::pipeline {

/// An artifact was produced under a different configuration.
class ConfigMismatchError : public Error {
 public:
  using Error::Error;
};

class ArtifactLayout {
 public:
  explicit ArtifactLayout(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path DescriptorDir(Modality m) const;
  std::filesystem::path DescriptorFile(Modality m, const std::string& id) const;
  std::filesystem::path DescriptorStamp(Modality m) const;
  std::filesystem::path CodebookFile(Modality m) const;
  std::filesystem::path ModelFile(Modality m) const;
  std::filesystem::path TrainRecord(Modality m) const;
  std::filesystem::path ThetaFile() const;
  std::filesystem::path ScoreFile(Split split) const;
  std::filesystem::path FusedFile(Split split) const;
  std::filesystem::path PredictFile() const;
  std::filesystem::path ReportText(Split split) const;
  std::filesystem::path ReportJson(Split split) const;
  std::filesystem::path ConfusionFile(Split split) const;
  std::filesystem::path RunManifest() const;

 private:
  std::filesystem::path root_;
};

struct RunOptions {
  int workers = 1;
  bool force = false;  // overrule config-hash guards
};

struct ExtractSummary {
  std::size_t processed = 0;
  std::size_t skipped = 0;  // already up to date
  std::vector<std::string> failures;  // "<id>: <reason>"
};

/// Extracts descriptors for every segment of the manifest. Existing outputs
/// newer than their media and stamped with the same config are skipped.
/// Per-segment failures are logged and collected. Throws ConfigMismatchError
/// when the directory holds descriptors from another config, unless forced
/// (which discards them).
ExtractSummary Extract(const Manifest& manifest, Modality modality, const PipelineConfig& config,
                       const ArtifactLayout& layout, const RunOptions& options);

struct TrainSummary {
  Modality modality = Modality::kAudio;
  std::size_t segments = 0;
  std::size_t sampled_per_class = 0;
  bool sampled_with_replacement = false;
  std::size_t em_iterations = 0;
  double best_C = 0.0;
  double cv_accuracy = 0.0;
};

/// Codebook and classifier for one modality from the manifest's train split.
TrainSummary Train(const Manifest& manifest, Modality modality, const PipelineConfig& config,
                   const ArtifactLayout& layout, const RunOptions& options);

struct SegmentScores {
  std::vector<std::string> ids;
  std::vector<double> distance;  // signed distance to the hyperplane
  std::vector<double> score;     // normalized confidence in [0, 1]
};

/// Scores the manifest's segments with one modality's trained artifacts.
SegmentScores Score(const Manifest& manifest, Modality modality, const PipelineConfig& config,
                    const ArtifactLayout& layout, const RunOptions& options);

struct EvaluateSummary {
  std::optional<double> theta;  // score-level fusion only
  std::string theta_source;     // "fixed" or "search:<split>"
  std::vector<double> theta_grid, theta_errors;
  std::vector<metrics::MetricReport> reports;  // audio, video, fused
};

/// Scores, fuses and reports on one labeled split.
EvaluateSummary Evaluate(const Manifest& manifest, Split split, const PipelineConfig& config,
                         const ArtifactLayout& layout, const RunOptions& options);

struct Prediction {
  std::string id;
  double audio = 0.0, video = 0.0, fused = 0.0;
  Label label = Label::kNegative;
  double sentiment = 0.0;
};

/// Fused predictions for every segment; no labels needed. Score-level fusion
/// takes theta from the config or else from a prior evaluate run.
std::vector<Prediction> Predict(const Manifest& manifest, const PipelineConfig& config,
                                const ArtifactLayout& layout, const RunOptions& options);

/// Records a completed stage in run_manifest.json.
void RecordStage(const ArtifactLayout& layout, const std::string& stage,
                 const std::string& config_hash, std::uint64_t seed);

}  // namespace mmsent::pipeline
