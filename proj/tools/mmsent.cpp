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

// mmsent: batch runner for the multimodal sentiment pipeline.
//
// Exit status: 0 on success, 1 when the run (or part of it) failed, 2 for
// invalid invocations: bad flags, config or manifest, and artifacts that
// were produced under a different config (unless --force).

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mmsent/binary_io.hpp"
#include "mmsent/config.hpp"
#include "mmsent/corpus.hpp"
#include "mmsent/error.hpp"
#include "mmsent/log.hpp"
#include "mmsent/pipeline.hpp"
#include "mmsent/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mmsent;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir = "mmsent-out";
  bool force = false;
  bool verbose = false;
  bool quiet = false;
};

struct PipelineFlags {
  std::string manifest;
  std::string modality = "both";
  std::string split;
  std::string fusion;
  std::optional<double> theta;
};

void AddCommon(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (defaults when omitted)");
  cmd->add_option("--seed", f.seed, "root seed (overrides the config)");
  cmd->add_option("--workers", f.workers, "worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", f.out_dir, "artifact directory")->capture_default_str();
  cmd->add_flag("--force", f.force, "accept artifacts produced under a different config");
  cmd->add_flag("-v,--verbose", f.verbose, "debug logging");
  cmd->add_flag("-q,--quiet", f.quiet, "errors only");
}

PipelineConfig BuildConfig(const CommonFlags& c, const PipelineFlags* p) {
  try {
    PipelineConfig config = c.config_path.empty() ? PipelineConfig{} : LoadConfig(c.config_path);
    if (c.seed) config.seed = *c.seed;
    if (c.workers) config.workers = *c.workers;
    if (p && !p->fusion.empty()) config.fusion.mode = ParseFusionMode(p->fusion);
    if (p && p->theta) config.fusion.theta = *p->theta;
    config.Validate();
    return config;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

Manifest LoadManifestOrThrow(const std::string& path, const std::string& split) {
  try {
    Manifest m = LoadManifest(path);
    if (!split.empty()) m = FilterSplit(m, ParseSplit(split));
    return m;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::vector<Modality> Modalities(const std::string& token) {
  if (token == "both") return {Modality::kAudio, Modality::kVideo};
  try {
    return {ParseModality(token)};
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void SetLogLevel(const CommonFlags& c) {
  log::SetLevel(c.quiet ? log::Level::kError : c.verbose ? log::Level::kDebug : log::Level::kInfo);
}

pipeline::RunOptions Options(const PipelineConfig& config, const CommonFlags& c) {
  return {config.workers, c.force};
}

int RunExtract(const CommonFlags& c, const PipelineFlags& p) {
  const PipelineConfig config = BuildConfig(c, &p);
  const Manifest manifest = LoadManifestOrThrow(p.manifest, p.split);
  const pipeline::ArtifactLayout layout(c.out_dir);
  int status = kExitOk;
  for (Modality m : Modalities(p.modality)) {
    const auto s = pipeline::Extract(manifest, m, config, layout, Options(config, c));
    std::printf("extract %s: %zu extracted, %zu up to date, %zu failed\n",
                std::string(ModalityName(m)).c_str(), s.processed, s.skipped, s.failures.size());
    for (const auto& f : s.failures) std::printf("  failed %s\n", f.c_str());
    if (!s.failures.empty()) status = kExitFailure;
    pipeline::RecordStage(layout, "extract." + std::string(ModalityName(m)),
                          DescriptorConfigHash(config, m), config.seed);
  }
  return status;
}

int RunTrain(const CommonFlags& c, const PipelineFlags& p) {
  const PipelineConfig config = BuildConfig(c, &p);
  const Manifest manifest = LoadManifestOrThrow(p.manifest, "");
  const pipeline::ArtifactLayout layout(c.out_dir);
  for (Modality m : Modalities(p.modality)) {
    const auto s = pipeline::Train(manifest, m, config, layout, Options(config, c));
    std::printf(
        "train %s: %zu segments, %zu descriptors per class%s, %zu EM iterations, C=%g (cv accuracy "
        "%.4f)\n",
        std::string(ModalityName(m)).c_str(), s.segments, s.sampled_per_class,
        s.sampled_with_replacement ? " (with replacement)" : "", s.em_iterations, s.best_C,
        s.cv_accuracy);
    pipeline::RecordStage(layout, "train." + std::string(ModalityName(m)), TrainConfigHash(config, m),
                          config.seed);
  }
  return kExitOk;
}

int RunEvaluate(const CommonFlags& c, const PipelineFlags& p) {
  const PipelineConfig config = BuildConfig(c, &p);
  const Manifest manifest = LoadManifestOrThrow(p.manifest, "");
  Split split = Split::kValidation;
  try {
    if (!p.split.empty()) split = ParseSplit(p.split);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const pipeline::ArtifactLayout layout(c.out_dir);
  const auto s = pipeline::Evaluate(manifest, split, config, layout, Options(config, c));
  if (s.theta) {
    std::printf("theta=%g (%s)\n", *s.theta, s.theta_source.c_str());
    for (std::size_t i = 0; i < s.theta_grid.size(); ++i) {
      std::printf("  theta %.2f error %.6f\n", s.theta_grid[i], s.theta_errors[i]);
    }
  }
  std::fputs(io::ReadFile(layout.ConfusionFile(split)).c_str(), stdout);
  for (const auto& r : s.reports) {
    std::printf("%s: precision %.4f recall %.4f f1 %.4f accuracy %.4f mae %.4f\n", r.name.c_str(),
                r.prf1.precision, r.prf1.recall, r.prf1.f1, r.binary.plain, r.mae);
  }
  pipeline::RecordStage(layout, "evaluate." + std::string(SplitName(split)), FusionConfigHash(config),
                        config.seed);
  return kExitOk;
}

int RunPredict(const CommonFlags& c, const PipelineFlags& p) {
  const PipelineConfig config = BuildConfig(c, &p);
  const Manifest manifest = LoadManifestOrThrow(p.manifest, p.split);
  const pipeline::ArtifactLayout layout(c.out_dir);
  const auto preds = pipeline::Predict(manifest, config, layout, Options(config, c));
  std::printf("predict: %zu segments -> %s\n", preds.size(), layout.PredictFile().string().c_str());
  pipeline::RecordStage(layout, "predict", FusionConfigHash(config), config.seed);
  return kExitOk;
}

int RunReport(const CommonFlags& c, bool defaults, const std::string& split) {
  if (defaults) {
    std::fputs(ConfigToJson(PipelineConfig{}).c_str(), stdout);
    return kExitOk;
  }
  const pipeline::ArtifactLayout layout(c.out_dir);
  std::vector<Split> splits;
  try {
    if (split.empty()) {
      splits = {Split::kTrain, Split::kValidation, Split::kTest};
    } else {
      splits = {ParseSplit(split)};
    }
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  bool any = false;
  for (Split s : splits) {
    if (!fs::exists(layout.ReportText(s))) continue;
    any = true;
    std::fputs(io::ReadFile(layout.ReportText(s)).c_str(), stdout);
    std::fputs(io::ReadFile(layout.ConfusionFile(s)).c_str(), stdout);
  }
  if (!any) {
    std::fprintf(stderr, "no reports under %s (run evaluate first)\n", c.out_dir.c_str());
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal sentiment polarity pipeline"};
  app.require_subcommand(1);

  CommonFlags common;
  PipelineFlags flags;

  auto* extract = app.add_subcommand("extract", "extract per-segment descriptors");
  auto* train = app.add_subcommand("train", "fit codebooks and classifiers on the train split");
  auto* evaluate = app.add_subcommand("evaluate", "score, fuse and report on a labeled split");
  auto* predict = app.add_subcommand("predict", "fused predictions for every segment");
  auto* synth = app.add_subcommand("synth", "generate a synthetic two-class corpus");
  auto* report = app.add_subcommand("report", "print reports or the default config");

  for (auto* cmd : {extract, train, evaluate, predict, synth, report}) AddCommon(cmd, common);
  for (auto* cmd : {extract, train, evaluate, predict}) {
    cmd->add_option("--manifest", flags.manifest, "segment manifest (JSON lines)")->required();
  }
  for (auto* cmd : {extract, train}) {
    cmd->add_option("--modality", flags.modality, "audio, video or both")
        ->check(CLI::IsMember({"audio", "video", "both"}))
        ->capture_default_str();
  }
  extract->add_option("--split", flags.split, "restrict to one split");
  evaluate->add_option("--split", flags.split, "split to evaluate (default validation)");
  predict->add_option("--split", flags.split, "restrict to one split");
  for (auto* cmd : {evaluate, predict}) {
    cmd->add_option("--fusion", flags.fusion, "score or output")
        ->check(CLI::IsMember({"score", "output"}));
    cmd->add_option("--theta", flags.theta, "fixed video weight for score-level fusion")
        ->check(CLI::Range(0.0, 1.0));
  }

  synth::SynthOptions synth_options;
  synth->add_option("--segments", synth_options.segments, "number of segments")->capture_default_str();
  synth->add_option("--train", synth_options.train, "segments in the train split")->capture_default_str();
  synth->add_option("--audio-seconds", synth_options.audio_seconds, "tone length")
      ->capture_default_str();

  bool defaults = false;
  std::string report_split;
  report->add_flag("--defaults", defaults, "print the default config");
  report->add_option("--split", report_split, "only this split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  SetLogLevel(common);

  try {
    if (*extract) return RunExtract(common, flags);
    if (*train) return RunTrain(common, flags);
    if (*evaluate) return RunEvaluate(common, flags);
    if (*predict) return RunPredict(common, flags);
    if (*synth) {
      if (common.seed) synth_options.seed = *common.seed;
      if (common.workers) synth_options.workers = *common.workers;
      const Manifest m = synth::GenerateCorpus(common.out_dir, synth_options);
      std::printf("synth: %zu segments -> %s\n", m.size(),
                  (fs::path(common.out_dir) / "manifest.jsonl").string().c_str());
      return kExitOk;
    }
    if (*report) return RunReport(common, defaults, report_split);
  } catch (const UsageError& e) {
    log::Err(e.what());
    return kExitUsage;
  } catch (const pipeline::ConfigMismatchError& e) {
    log::Err(e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log::Err(e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
