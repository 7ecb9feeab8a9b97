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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "mmsent/binary_io.hpp"
#include "mmsent/error.hpp"
#include "mmsent/fusion.hpp"
#include "mmsent/metrics.hpp"
#include "mmsent/pipeline.hpp"
#include "mmsent/synth.hpp"
#include "test_util.hpp"

using namespace mmsent;
using namespace mmsent::pipeline;
namespace fs = std::filesystem;

namespace {

PipelineConfig SmallConfig() {
  PipelineConfig c;
  c.codebook.K = 4;
  c.codebook.budget = 2000;
  c.codebook.max_iters = 30;
  c.svm.c_exp_min = -1;
  c.svm.c_exp_max = 3;
  c.svm.folds = 3;
  c.video.max_points = 60;
  return c;
}

synth::SynthOptions SmallCorpus() {
  synth::SynthOptions o;
  o.segments = 24;
  o.train = 16;
  o.audio_seconds = 0.3;
  o.frames = 20;
  o.height = 40;
  o.width = 40;
  return o;
}

// One corpus and trained model set shared by the read-only cases.
struct Fixture {
  testing::TempDir corpus{"pipe-corpus"};
  testing::TempDir out{"pipe-out"};
  Manifest manifest;
  PipelineConfig config = SmallConfig();
  ArtifactLayout layout{out.path()};

  Fixture() {
    manifest = synth::GenerateCorpus(corpus.path(), SmallCorpus());
    for (Modality m : {Modality::kAudio, Modality::kVideo}) {
      Extract(manifest, m, config, layout, {});
      Train(manifest, m, config, layout, {});
    }
  }
};

Fixture& Shared() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("extract skips up-to-date segments") {
  Fixture& f = Shared();
  const ExtractSummary again = Extract(f.manifest, Modality::kAudio, f.config, f.layout, {});
  CHECK(again.processed == 0);
  CHECK(again.skipped == f.manifest.size());
  CHECK(again.failures.empty());
  for (const auto& r : f.manifest.segments) {
    CHECK(fs::exists(f.layout.DescriptorFile(Modality::kVideo, r.id)));
  }
}

TEST_CASE("a missing media file fails only its segment") {
  Fixture& f = Shared();
  testing::TempDir out("pipe-missing");
  Manifest m = f.manifest;
  m.segments[3].audio = "audio/not-there.pcm";
  const ExtractSummary s = Extract(m, Modality::kAudio, f.config, ArtifactLayout(out.path()), {});
  CHECK(s.processed == m.size() - 1);
  REQUIRE(s.failures.size() == 1);
  CHECK(s.failures[0].find(m.segments[3].id) == 0);
}

TEST_CASE("descriptors from another config are refused unless forced") {
  Fixture& f = Shared();
  testing::TempDir out("pipe-mismatch");
  const ArtifactLayout layout(out.path());
  Manifest m = FilterSplit(f.manifest, Split::kValidation);
  Extract(m, Modality::kAudio, f.config, layout, {});
  PipelineConfig other = f.config;
  other.prosody.hop = 0.02;
  CHECK_THROWS_AS(Extract(m, Modality::kAudio, other, layout, {}), ConfigMismatchError);
  RunOptions force;
  force.force = true;
  const ExtractSummary s = Extract(m, Modality::kAudio, other, layout, force);
  CHECK(s.processed == m.size());
  // Training under the new codebook settings sees the old models as stale.
  PipelineConfig k8 = f.config;
  k8.codebook.K = 8;
  CHECK_THROWS_AS(Score(m, Modality::kAudio, k8, f.layout, {}), ConfigMismatchError);
}

TEST_CASE("training needs both classes") {
  Fixture& f = Shared();
  testing::TempDir out("pipe-oneclass");
  const ArtifactLayout layout(out.path());
  Manifest m;
  m.base_dir = f.manifest.base_dir;
  for (const auto& r : f.manifest.segments) {
    if (r.split == Split::kTrain && r.label() == Label::kPositive) m.segments.push_back(r);
  }
  Extract(m, Modality::kAudio, f.config, layout, {});
  try {
    Train(m, Modality::kAudio, f.config, layout, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("only positive labels") != std::string::npos);
  }
}

TEST_CASE("fixed theta fuses the unimodal scores by hand") {
  Fixture& f = Shared();
  PipelineConfig c = f.config;
  c.fusion.theta = 0.5;
  const EvaluateSummary s = Evaluate(f.manifest, Split::kValidation, c, f.layout, {});
  REQUIRE(s.theta);
  CHECK(*s.theta == 0.5);
  CHECK(s.theta_source == "fixed");
  REQUIRE(s.reports.size() == 3);

  const Manifest val = FilterSplit(f.manifest, Split::kValidation);
  const SegmentScores a = Score(val, Modality::kAudio, c, f.layout, {});
  const SegmentScores v = Score(val, Modality::kVideo, c, f.layout, {});
  std::istringstream fused(io::ReadFile(f.layout.FusedFile(Split::kValidation)));
  for (std::size_t i = 0; i < val.size(); ++i) {
    std::string id;
    double score;
    int label;
    REQUIRE(static_cast<bool>(fused >> id >> score >> label));
    CHECK(id == val.segments[i].id);
    const double expect = 0.5 * v.score[i] + 0.5 * a.score[i];
    CHECK(std::abs(score - expect) <= 1e-12);
    CHECK(label == (expect > 0.5 ? 1 : -1));
  }
  CHECK(fs::exists(f.layout.ReportJson(Split::kValidation)));
  CHECK(fs::exists(f.layout.ConfusionFile(Split::kValidation)));
}

TEST_CASE("theta search records its trace") {
  Fixture& f = Shared();
  const EvaluateSummary s = Evaluate(f.manifest, Split::kValidation, f.config, f.layout, {});
  REQUIRE(s.theta);
  CHECK(s.theta_source == "search:validation");
  CHECK(s.theta_grid == f.config.ThetaGrid());
  REQUIRE(s.theta_errors.size() == s.theta_grid.size());
  for (double e : s.theta_errors) CHECK(e >= s.theta_errors[static_cast<std::size_t>(std::lround(*s.theta * 5))]);
  CHECK(fs::exists(f.layout.ThetaFile()));
}

TEST_CASE("output-level fusion stays on its five-point range") {
  Fixture& f = Shared();
  PipelineConfig c = f.config;
  c.fusion.mode = FusionMode::kOutput;
  const EvaluateSummary s = Evaluate(f.manifest, Split::kValidation, c, f.layout, {});
  CHECK_FALSE(s.theta);
  std::istringstream fused(io::ReadFile(f.layout.FusedFile(Split::kValidation)));
  std::string id;
  double score;
  int label;
  while (fused >> id >> score >> label) {
    const double scaled = score * 4.0;
    CHECK(std::abs(scaled - std::round(scaled)) <= 1e-12);
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);
    const int want = score > 0.5 ? 1 : -1;
    CHECK(label == want);
  }
}

TEST_CASE("predict works without labels and is repeatable") {
  Fixture& f = Shared();
  Manifest unlabeled = f.manifest;
  for (auto& r : unlabeled.segments) r.sentiment.reset();
  PipelineConfig c = f.config;
  c.fusion.theta = 0.4;
  const auto p1 = Predict(unlabeled, c, f.layout, {});
  REQUIRE(p1.size() == unlabeled.size());
  for (const auto& p : p1) {
    CHECK(p.fused == doctest::Approx(0.4 * p.video + 0.6 * p.audio).epsilon(1e-12));
    CHECK(p.sentiment == doctest::Approx(6.0 * p.fused - 3.0).epsilon(1e-12));
    const Label want = p.fused > 0.6 ? Label::kPositive : Label::kNegative;
    CHECK(p.label == want);
  }
  const std::string first = io::ReadFile(f.layout.PredictFile());
  RunOptions parallel;
  parallel.workers = 3;
  Predict(unlabeled, c, f.layout, parallel);
  CHECK(io::ReadFile(f.layout.PredictFile()) == first);
}

TEST_CASE("predict without a fusion weight fails clearly") {
  Fixture& f = Shared();
  testing::TempDir out("pipe-nothing");
  const ArtifactLayout layout(out.path());
  try {
    Predict(f.manifest, f.config, layout, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no fusion weight") != std::string::npos);
  }
}
