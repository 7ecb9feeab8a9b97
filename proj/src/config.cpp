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

#include "mmsent/config.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <set>

#include "mmsent/binary_io.hpp"
#include "mmsent/classifier.hpp"
#include "mmsent/error.hpp"
#include "mmsent/rng.hpp"

namespace mmsent {

using Json = nlohmann::ordered_json;

std::string_view FusionModeName(FusionMode mode) {
  return mode == FusionMode::kScore ? "score" : "output";
}

FusionMode ParseFusionMode(std::string_view token) {
  if (token == "score") return FusionMode::kScore;
  if (token == "output") return FusionMode::kOutput;
  throw PreconditionError("unknown fusion mode \"" + std::string(token) +
                          "\" (expected score or output)");
}

namespace {

void Require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError("config: " + message);
}

int StepCount(double step) {
  Require(step > 0.0 && step <= 1.0, "fusion.theta_step must lie in (0, 1]");
  const double n = std::round(1.0 / step);
  Require(std::abs(n * step - 1.0) < 1e-9, "fusion.theta_step must divide 1 evenly");
  return static_cast<int>(n);
}

Json ProsodyJson(const audio::ProsodyConfig& p) {
  return Json{{"window", p.window},
              {"hop", p.hop},
              {"f0_min", p.f0_min},
              {"f0_max", p.f0_max},
              {"subharmonics", p.subharmonics},
              {"compression", p.compression},
              {"voicing_threshold", p.voicing_threshold},
              {"points_per_octave", p.points_per_octave}};
}

Json VideoJson(const video::VideoConfig& v) {
  return Json{{"spatial_scales", v.ladder.spatial},
              {"temporal_scales", v.ladder.temporal},
              {"threshold", v.threshold},
              {"max_points", v.max_points}};
}

Json CodebookJson(const CodebookConfig& c) {
  return Json{{"K", c.K},
              {"budget", c.budget},
              {"max_iters", c.max_iters},
              {"tol", c.tol},
              {"kmeans_iters", c.kmeans_iters},
              {"variance_floor_scale", c.variance_floor_scale}};
}

Json SvmJson(const SvmConfig& s) {
  return Json{{"folds", s.folds},
              {"c_exp_min", s.c_exp_min},
              {"c_exp_max", s.c_exp_max},
              {"max_epochs", s.max_epochs},
              {"tolerance", s.tolerance}};
}

Json FusionJson(const FusionConfig& f) {
  Json j{{"mode", FusionModeName(f.mode)},
         {"theta_step", f.theta_step},
         {"threshold", fusion::ThresholdRuleName(f.threshold)},
         {"theta_split", SplitName(f.theta_split)}};
  j["theta"] = f.theta ? Json(*f.theta) : Json(nullptr);
  return j;
}

std::string Hash(const Json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(Fnv1a64(j.dump())));
  return buf;
}

// Reads known keys out of one JSON object and rejects the rest.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw FormatError("config: \"" + name_ + "\" must be an object");
  }

  template <typename T>
  void Read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw FormatError("config: bad value for \"" + name_ + "." + key + "\"");
    }
  }

  const Json* Child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw FormatError("config: unknown key \"" + (name_.empty() ? "" : name_ + ".") +
                          it.key() + "\"");
      }
    }
  }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

void PipelineConfig::Validate() const {
  const auto& p = prosody;
  Require(p.window > 0.0 && p.hop > 0.0 && p.hop <= p.window,
          "prosody.window and prosody.hop must be positive with hop <= window");
  Require(p.f0_min > 0.0 && p.f0_min < p.f0_max, "prosody.f0_min must lie in (0, f0_max)");
  Require(p.subharmonics >= 1, "prosody.subharmonics must be >= 1");
  Require(p.compression > 0.0 && p.compression <= 1.0, "prosody.compression must lie in (0, 1]");
  Require(p.voicing_threshold >= 0.0 && p.voicing_threshold <= 1.0,
          "prosody.voicing_threshold must lie in [0, 1]");
  Require(p.points_per_octave >= 1, "prosody.points_per_octave must be >= 1");
  Require(!video.ladder.spatial.empty() && !video.ladder.temporal.empty(),
          "video scale lists must be non-empty");
  for (double s : video.ladder.spatial) Require(s > 0.0, "video.spatial_scales must be positive");
  for (double s : video.ladder.temporal) Require(s > 0.0, "video.temporal_scales must be positive");
  Require(video.threshold >= 0.0, "video.threshold must be >= 0");
  Require(video.max_points >= 1, "video.max_points must be >= 1");
  Require(codebook.K >= 1, "codebook.K must be >= 1");
  Require(codebook.budget > 0 && codebook.budget % 2 == 0,
          "codebook.budget must be positive and even");
  Require(codebook.max_iters >= 1 && codebook.kmeans_iters >= 0,
          "codebook iteration limits must be positive");
  Require(codebook.tol > 0.0, "codebook.tol must be positive");
  Require(codebook.variance_floor_scale > 0.0, "codebook.variance_floor_scale must be positive");
  Require(svm.folds >= 2, "svm.folds must be >= 2");
  Require(svm.c_exp_min <= svm.c_exp_max, "svm.c_exp_min must not exceed svm.c_exp_max");
  Require(svm.max_epochs >= 1 && svm.tolerance > 0.0,
          "svm.max_epochs and svm.tolerance must be positive");
  StepCount(fusion.theta_step);
  if (fusion.theta) Require(*fusion.theta >= 0.0 && *fusion.theta <= 1.0, "fusion.theta must lie in [0, 1]");
  Require(workers >= 1, "workers must be >= 1");
}

std::vector<double> PipelineConfig::ThetaGrid() const {
  const int n = StepCount(fusion.theta_step);
  std::vector<double> grid;
  for (int i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / n);
  return grid;
}

std::vector<double> PipelineConfig::CGrid() const {
  return classifier::Log2Grid(svm.c_exp_min, svm.c_exp_max);
}

std::string ConfigToJson(const PipelineConfig& c) {
  Json j{{"prosody", ProsodyJson(c.prosody)}, {"video", VideoJson(c.video)},
         {"codebook", CodebookJson(c.codebook)}, {"svm", SvmJson(c.svm)},
         {"fusion", FusionJson(c.fusion)},       {"seed", c.seed},
         {"workers", c.workers}};
  return j.dump(2) + "\n";
}

PipelineConfig ConfigFromJson(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config: malformed JSON: ") + e.what());
  }
  PipelineConfig c;
  Section top(root, "");
  if (const Json* j = top.Child("prosody")) {
    Section s(*j, "prosody");
    s.Read("window", c.prosody.window);
    s.Read("hop", c.prosody.hop);
    s.Read("f0_min", c.prosody.f0_min);
    s.Read("f0_max", c.prosody.f0_max);
    s.Read("subharmonics", c.prosody.subharmonics);
    s.Read("compression", c.prosody.compression);
    s.Read("voicing_threshold", c.prosody.voicing_threshold);
    s.Read("points_per_octave", c.prosody.points_per_octave);
    s.Finish();
  }
  if (const Json* j = top.Child("video")) {
    Section s(*j, "video");
    s.Read("spatial_scales", c.video.ladder.spatial);
    s.Read("temporal_scales", c.video.ladder.temporal);
    s.Read("threshold", c.video.threshold);
    s.Read("max_points", c.video.max_points);
    s.Finish();
  }
  if (const Json* j = top.Child("codebook")) {
    Section s(*j, "codebook");
    s.Read("K", c.codebook.K);
    s.Read("budget", c.codebook.budget);
    s.Read("max_iters", c.codebook.max_iters);
    s.Read("tol", c.codebook.tol);
    s.Read("kmeans_iters", c.codebook.kmeans_iters);
    s.Read("variance_floor_scale", c.codebook.variance_floor_scale);
    s.Finish();
  }
  if (const Json* j = top.Child("svm")) {
    Section s(*j, "svm");
    s.Read("folds", c.svm.folds);
    s.Read("c_exp_min", c.svm.c_exp_min);
    s.Read("c_exp_max", c.svm.c_exp_max);
    s.Read("max_epochs", c.svm.max_epochs);
    s.Read("tolerance", c.svm.tolerance);
    s.Finish();
  }
  if (const Json* j = top.Child("fusion")) {
    Section s(*j, "fusion");
    std::string mode(FusionModeName(c.fusion.mode));
    std::string threshold(fusion::ThresholdRuleName(c.fusion.threshold));
    std::string split(SplitName(c.fusion.theta_split));
    s.Read("mode", mode);
    s.Read("theta_step", c.fusion.theta_step);
    s.Read("threshold", threshold);
    s.Read("theta_split", split);
    if (const Json* t = s.Child("theta"); t && !t->is_null()) {
      if (!t->is_number()) throw FormatError("config: fusion.theta must be a number or null");
      c.fusion.theta = t->get<double>();
    }
    s.Finish();
    c.fusion.mode = ParseFusionMode(mode);
    c.fusion.threshold = fusion::ParseThresholdRule(threshold);
    c.fusion.theta_split = ParseSplit(split);
  }
  top.Read("seed", c.seed);
  top.Read("workers", c.workers);
  top.Finish();
  c.Validate();
  return c;
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  return ConfigFromJson(io::ReadFile(path));
}

std::string DescriptorConfigHash(const PipelineConfig& c, Modality modality) {
  return Hash(modality == Modality::kAudio ? Json{{"prosody", ProsodyJson(c.prosody)}}
                                           : Json{{"video", VideoJson(c.video)}});
}

std::string TrainConfigHash(const PipelineConfig& c, Modality modality) {
  return Hash(Json{{"descriptors", DescriptorConfigHash(c, modality)},
                   {"codebook", CodebookJson(c.codebook)},
                   {"svm", SvmJson(c.svm)},
                   {"seed", c.seed}});
}

std::string FusionConfigHash(const PipelineConfig& c) {
  return Hash(Json{{"audio", TrainConfigHash(c, Modality::kAudio)},
                   {"video", TrainConfigHash(c, Modality::kVideo)},
                   {"theta_step", c.fusion.theta_step},
                   {"threshold", fusion::ThresholdRuleName(c.fusion.threshold)},
                   {"theta_split", SplitName(c.fusion.theta_split)}});
}

}  // namespace mmsent
