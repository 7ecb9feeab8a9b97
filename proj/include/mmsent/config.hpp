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

// Pipeline configuration: every tunable of every stage, its JSON form, and
// the per-stage hashes stamped on artifacts.
//
// A config file is a JSON object with any subset of the sections printed by
// `mmsent report --defaults`; omitted keys keep their defaults, unknown keys
// are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmsent/audio.hpp"
#include "mmsent/descriptors.hpp"
#include "mmsent/fusion.hpp"
#include "mmsent/video.hpp"

namespace mmsent {

enum class FusionMode { kScore, kOutput };

std::string_view FusionModeName(FusionMode mode);
/// "score" or "output"; throws PreconditionError otherwise.
FusionMode ParseFusionMode(std::string_view token);

struct CodebookConfig {
  std::uint32_t K = 256;
  std::size_t budget = 1'000'000;
  int max_iters = 100;
  double tol = 1e-5;
  int kmeans_iters = 10;
  double variance_floor_scale = 1e-4;
};

struct SvmConfig {
  int folds = 5;
  int c_exp_min = -3;
  int c_exp_max = 15;
  int max_epochs = 1000;
  double tolerance = 1e-6;
};

struct FusionConfig {
  FusionMode mode = FusionMode::kScore;
  double theta_step = 0.2;
  fusion::ThresholdRule threshold = fusion::ThresholdRule::kOneMinusTheta;
  Split theta_split = Split::kValidation;
  std::optional<double> theta;  // fixed weight; skips the grid search
};

struct PipelineConfig {
  audio::ProsodyConfig prosody;
  video::VideoConfig video;
  CodebookConfig codebook;
  SvmConfig svm;
  FusionConfig fusion;
  std::uint64_t seed = 20180715;
  int workers = 1;

  /// Throws PreconditionError for out-of-range values.
  void Validate() const;

  /// theta_step must divide 1 into an integer number of steps.
  std::vector<double> ThetaGrid() const;
  std::vector<double> CGrid() const;
};

/// Full JSON form with every field.
std::string ConfigToJson(const PipelineConfig& config);
/// Overlays a JSON document on the defaults. Throws FormatError for malformed
/// or unknown keys and PreconditionError for invalid values.
PipelineConfig ConfigFromJson(std::string_view text);
PipelineConfig LoadConfig(const std::filesystem::path& path);

/// Hash of the settings that determine one modality's descriptors.
std::string DescriptorConfigHash(const PipelineConfig& config, Modality modality);
/// Descriptor hash plus codebook, SVM and seed settings.
std::string TrainConfigHash(const PipelineConfig& config, Modality modality);
/// Both train hashes plus the settings that shape the theta search.
std::string FusionConfigHash(const PipelineConfig& config);

}  // namespace mmsent
