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

#include "mmsent/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <json.hpp>
#include <mutex>
#include <sstream>

#include "mmsent/audio.hpp"
#include "mmsent/binary_io.hpp"
#include "mmsent/classifier.hpp"
#include "mmsent/codebook.hpp"
#include "mmsent/fusion.hpp"
#include "mmsent/log.hpp"
#include "mmsent/parallel.hpp"
#include "mmsent/rng.hpp"
#include "mmsent/video.hpp"

namespace mmsent::pipeline {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

fs::path ArtifactLayout::DescriptorDir(Modality m) const {
  return root_ / "descriptors" / std::string(ModalityName(m));
}
fs::path ArtifactLayout::DescriptorFile(Modality m, const std::string& id) const {
  return DescriptorDir(m) / (id + ".dsc");
}
fs::path ArtifactLayout::DescriptorStamp(Modality m) const { return DescriptorDir(m) / "stamp.json"; }
fs::path ArtifactLayout::CodebookFile(Modality m) const {
  return root_ / "models" / (std::string(ModalityName(m)) + ".gmm");
}
fs::path ArtifactLayout::ModelFile(Modality m) const {
  return root_ / "models" / (std::string(ModalityName(m)) + ".svm");
}
fs::path ArtifactLayout::TrainRecord(Modality m) const {
  return root_ / "models" / (std::string(ModalityName(m)) + ".json");
}
fs::path ArtifactLayout::ThetaFile() const { return root_ / "models" / "theta.json"; }
fs::path ArtifactLayout::ScoreFile(Split s) const {
  return root_ / "scores" / (std::string(SplitName(s)) + ".scores.txt");
}
fs::path ArtifactLayout::FusedFile(Split s) const {
  return root_ / "predictions" / (std::string(SplitName(s)) + ".fused.txt");
}
fs::path ArtifactLayout::PredictFile() const { return root_ / "predictions" / "predict.tsv"; }
fs::path ArtifactLayout::ReportText(Split s) const {
  return root_ / "reports" / (std::string(SplitName(s)) + ".txt");
}
fs::path ArtifactLayout::ReportJson(Split s) const {
  return root_ / "reports" / (std::string(SplitName(s)) + ".json");
}
fs::path ArtifactLayout::ConfusionFile(Split s) const {
  return root_ / "reports" / (std::string(SplitName(s)) + ".confusion.txt");
}
fs::path ArtifactLayout::RunManifest() const { return root_ / "run_manifest.json"; }

namespace {

std::uint64_t StageSeed(const PipelineConfig& config, const char* stage, Modality m) {
  return DeriveSeed(config.seed, stage, static_cast<std::uint64_t>(m));
}

Json ReadJson(const fs::path& path) {
  try {
    return Json::parse(io::ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": malformed JSON: " + e.what());
  }
}

void WriteJson(const fs::path& path, const Json& j) { io::WriteFileAtomic(path, j.dump(2) + "\n"); }

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CheckHash(const fs::path& record, const std::string& expected, bool force,
               const std::string& what) {
  if (!fs::exists(record)) {
    throw Error("missing " + what + " (" + record.string() + ")");
  }
  const std::string found = ReadJson(record).value("config_hash", "");
  if (found == expected) return;
  if (force) {
    log::Warn(what + " was produced under config " + found + ", current is " + expected +
              "; continuing because of --force");
    return;
  }
  throw ConfigMismatchError(what + " was produced under config " + found + " but the current config is " +
                            expected + " (rerun the producing stage or pass --force)");
}

bool UpToDate(const fs::path& output, const std::vector<fs::path>& inputs) {
  std::error_code ec;
  const auto out_time = fs::last_write_time(output, ec);
  if (ec) return false;
  for (const auto& in : inputs) {
    const auto t = fs::last_write_time(in, ec);
    if (ec || t > out_time) return false;
  }
  return true;
}

DescriptorSet ExtractOne(const Manifest& manifest, const SegmentRecord& r, Modality m,
                         const PipelineConfig& config) {
  if (m == Modality::kAudio) {
    const audio::PcmSignal pcm = audio::ReadPcm(manifest.Resolve(r.audio), r.sample_rate);
    return audio::ProsodyDescriptors(audio::ExtractProsody(pcm, config.prosody), config.prosody, r.id);
  }
  const video::FrameVolume vol = video::ReadVolume(manifest.Resolve(r.video));
  return video::ExtractVideoDescriptors(vol, config.video, r.id);
}

std::vector<DescriptorSet> LoadDescriptors(const Manifest& manifest, Modality m,
                                           const ArtifactLayout& layout, int workers) {
  std::vector<DescriptorSet> sets(manifest.size());
  ParallelFor(manifest.size(), workers, [&](std::size_t i) {
    const auto path = layout.DescriptorFile(m, manifest.segments[i].id);
    if (!fs::exists(path)) {
      throw Error("missing " + std::string(ModalityName(m)) + " descriptors for segment " +
                  manifest.segments[i].id + " (run extract)");
    }
    sets[i] = ReadDescriptorSet(path);
  });
  return sets;
}

codebook::Matrix EncodeAll(const codebook::GmmCodebook& cb, const std::vector<DescriptorSet>& sets,
                           int workers) {
  codebook::Matrix X(sets.size(), cb.K());
  ParallelFor(sets.size(), workers, [&](std::size_t i) {
    const auto v = codebook::Encode(cb, sets[i]);
    std::copy(v.values.begin(), v.values.end(), X.row(i).begin());
  });
  return X;
}

std::vector<Label> TruthLabels(const Manifest& manifest, const std::string& purpose) {
  std::vector<Label> y;
  for (const auto& r : manifest.segments) {
    if (!r.labeled()) throw PreconditionError(purpose + ": segment " + r.id + " has no sentiment label");
    y.push_back(r.label());
  }
  return y;
}

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ExtractSummary Extract(const Manifest& manifest, Modality m, const PipelineConfig& config,
                       const ArtifactLayout& layout, const RunOptions& options) {
  const std::string hash = DescriptorConfigHash(config, m);
  const fs::path stamp = layout.DescriptorStamp(m);
  if (fs::exists(stamp)) {
    const std::string found = ReadJson(stamp).value("config_hash", "");
    if (found != hash) {
      if (!options.force) {
        throw ConfigMismatchError(layout.DescriptorDir(m).string() +
                                  " holds descriptors from config " + found +
                                  " but the current config is " + hash + " (pass --force to replace them)");
      }
      log::Warn("discarding " + std::string(ModalityName(m)) + " descriptors from config " + found);
      for (const auto& entry : fs::directory_iterator(layout.DescriptorDir(m))) {
        if (entry.path().extension() == ".dsc") fs::remove(entry.path());
      }
    }
  }
  fs::create_directories(layout.DescriptorDir(m));
  // Rewriting an unchanged stamp would make every descriptor look stale.
  if (!fs::exists(stamp) || ReadJson(stamp).value("config_hash", "") != hash) {
    WriteJson(stamp, Json{{"modality", ModalityName(m)}, {"config_hash", hash}});
  }

  enum class Outcome { kDone, kSkipped, kFailed };
  std::vector<Outcome> outcome(manifest.size());
  std::vector<std::string> reason(manifest.size());
  ParallelFor(manifest.size(), options.workers, [&](std::size_t i) {
    const SegmentRecord& r = manifest.segments[i];
    const fs::path out = layout.DescriptorFile(m, r.id);
    const fs::path media = manifest.Resolve(m == Modality::kAudio ? r.audio : r.video);
    if (UpToDate(out, {media, stamp})) {
      outcome[i] = Outcome::kSkipped;
      return;
    }
    try {
      WriteDescriptorSet(out, ExtractOne(manifest, r, m, config));
      outcome[i] = Outcome::kDone;
    } catch (const std::exception& e) {
      outcome[i] = Outcome::kFailed;
      reason[i] = e.what();
      log::Err("extract " + std::string(ModalityName(m)) + " " + r.id + ": " + e.what());
    }
  });
  ExtractSummary s;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    switch (outcome[i]) {
      case Outcome::kDone: ++s.processed; break;
      case Outcome::kSkipped: ++s.skipped; break;
      case Outcome::kFailed: s.failures.push_back(manifest.segments[i].id + ": " + reason[i]); break;
    }
  }
  return s;
}

TrainSummary Train(const Manifest& manifest, Modality m, const PipelineConfig& config,
                   const ArtifactLayout& layout, const RunOptions& options) {
  const std::string name(ModalityName(m));
  CheckHash(layout.DescriptorStamp(m), DescriptorConfigHash(config, m), options.force,
            name + " descriptors");
  const Manifest train = FilterSplit(manifest, Split::kTrain);
  if (train.empty()) throw PreconditionError("manifest has no train segments");
  const std::vector<Label> y = TruthLabels(train, "train");
  const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), Label::kPositive));
  if (positives == 0 || positives == y.size()) {
    throw PreconditionError(std::string("training split has only ") +
                            (positives == 0 ? "negative" : "positive") + " labels (" +
                            std::to_string(y.size()) + " segments); both classes are required");
  }
  const std::vector<DescriptorSet> sets = LoadDescriptors(train, m, layout, options.workers);

  std::vector<std::pair<const DescriptorSet*, Label>> labeled;
  for (std::size_t i = 0; i < sets.size(); ++i) labeled.emplace_back(&sets[i], y[i]);
  const codebook::BalancedSample sample =
      codebook::SampleBalanced(labeled, config.codebook.budget, StageSeed(config, "sample", m));

  codebook::FitOptions fit;
  fit.K = config.codebook.K;
  fit.max_iters = config.codebook.max_iters;
  fit.tol = config.codebook.tol;
  fit.kmeans_iters = config.codebook.kmeans_iters;
  fit.variance_floor_scale = config.codebook.variance_floor_scale;
  fit.workers = options.workers;
  log::Info("fitting " + name + " codebook: K=" + std::to_string(fit.K) + " on " +
            std::to_string(sample.data.rows) + " descriptors");
  const codebook::GmmFit gmm = codebook::FitGmm(sample.data, m, StageSeed(config, "gmm", m), fit);

  const codebook::Matrix X = EncodeAll(gmm.codebook, sets, options.workers);
  classifier::SolverOptions solver;
  solver.max_epochs = config.svm.max_epochs;
  solver.tolerance = config.svm.tolerance;
  const classifier::CvResult cv = classifier::CrossValidateC(
      X, y, config.CGrid(), StageSeed(config, "cv", m), config.svm.folds, options.workers, solver);
  classifier::TrainReport report;
  const classifier::LinearSvmModel model =
      classifier::TrainSvm(X, y, cv.best_C, StageSeed(config, "svm", m), solver, &report);
  if (!report.converged) {
    log::Warn(name + " classifier stopped after " + std::to_string(report.epochs) +
              " epochs with KKT gap " + Num(report.kkt_gap));
  }

  codebook::WriteCodebook(layout.CodebookFile(m), gmm.codebook);
  classifier::WriteModel(layout.ModelFile(m), model);

  TrainSummary s;
  s.modality = m;
  s.segments = train.size();
  s.sampled_per_class = sample.per_class;
  s.sampled_with_replacement = sample.with_replacement;
  s.em_iterations = gmm.loglik_history.empty() ? 0 : gmm.loglik_history.size() - 1;
  s.best_C = cv.best_C;
  for (std::size_t i = 0; i < cv.grid.size(); ++i) {
    if (cv.grid[i] == cv.best_C) s.cv_accuracy = cv.mean_accuracy[i];
  }
  WriteJson(layout.TrainRecord(m),
            Json{{"modality", name},
                 {"config_hash", TrainConfigHash(config, m)},
                 {"descriptor_hash", DescriptorConfigHash(config, m)},
                 {"segments", s.segments},
                 {"sampled_per_class", s.sampled_per_class},
                 {"sampled_with_replacement", s.sampled_with_replacement},
                 {"em_iterations", s.em_iterations},
                 {"final_loglik", gmm.loglik_history.empty() ? 0.0 : gmm.loglik_history.back()},
                 {"cv_grid", cv.grid},
                 {"cv_accuracy", cv.mean_accuracy},
                 {"best_C", cv.best_C},
                 {"svm_epochs", report.epochs},
                 {"svm_converged", report.converged}});
  return s;
}

SegmentScores Score(const Manifest& manifest, Modality m, const PipelineConfig& config,
                    const ArtifactLayout& layout, const RunOptions& options) {
  const std::string name(ModalityName(m));
  CheckHash(layout.TrainRecord(m), TrainConfigHash(config, m), options.force, name + " model");
  CheckHash(layout.DescriptorStamp(m), DescriptorConfigHash(config, m), options.force,
            name + " descriptors");
  const codebook::GmmCodebook cb = codebook::ReadCodebook(layout.CodebookFile(m));
  const classifier::LinearSvmModel model = classifier::ReadModel(layout.ModelFile(m));
  if (model.dim() != cb.K()) {
    throw FormatError(name + " model dimension " + std::to_string(model.dim()) +
                      " does not match codebook size " + std::to_string(cb.K()));
  }
  const codebook::Matrix X = EncodeAll(cb, LoadDescriptors(manifest, m, layout, options.workers),
                                       options.workers);
  SegmentScores s;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    s.ids.push_back(manifest.segments[i].id);
    const double d = classifier::DecisionDistance(model, X.row(i));
    s.distance.push_back(d);
    s.score.push_back(classifier::NormalizeScore(model, d));
  }
  return s;
}

namespace {

std::vector<fusion::ScorePair> Pairs(const Manifest& manifest, const SegmentScores& a,
                                     const SegmentScores& v) {
  std::vector<fusion::ScorePair> pairs;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    fusion::ScorePair p;
    p.segment_id = manifest.segments[i].id;
    p.audio = a.score[i];
    p.video = v.score[i];
    if (manifest.segments[i].labeled()) p.truth = manifest.segments[i].label();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

fusion::FusedPrediction Fuse(const fusion::ScorePair& p, const PipelineConfig& config,
                             std::optional<double> theta) {
  if (config.fusion.mode == FusionMode::kOutput) return fusion::OutputLevelFuse(p);
  return fusion::ScoreLevelFuse(p, fusion::FusionWeight(*theta), config.fusion.threshold);
}

}  // namespace

EvaluateSummary Evaluate(const Manifest& manifest, Split split, const PipelineConfig& config,
                         const ArtifactLayout& layout, const RunOptions& options) {
  const Manifest eval = FilterSplit(manifest, split);
  if (eval.empty()) {
    throw PreconditionError("manifest has no " + std::string(SplitName(split)) + " segments");
  }
  const std::vector<Label> truth = TruthLabels(eval, "evaluate");
  const SegmentScores a = Score(eval, Modality::kAudio, config, layout, options);
  const SegmentScores v = Score(eval, Modality::kVideo, config, layout, options);
  const std::vector<fusion::ScorePair> pairs = Pairs(eval, a, v);

  EvaluateSummary out;
  Json theta_json;
  if (config.fusion.mode == FusionMode::kScore) {
    if (config.fusion.theta) {
      out.theta = *config.fusion.theta;
      out.theta_source = "fixed";
    } else {
      const Split ts = config.fusion.theta_split;
      std::vector<fusion::ScorePair> tune = pairs;
      if (ts != split) {
        const Manifest tm = FilterSplit(manifest, ts);
        if (tm.empty()) {
          throw PreconditionError("theta search split " + std::string(SplitName(ts)) +
                                  " has no segments");
        }
        TruthLabels(tm, "theta search");
        tune = Pairs(tm, Score(tm, Modality::kAudio, config, layout, options),
                     Score(tm, Modality::kVideo, config, layout, options));
      }
      const std::vector<double> grid = config.ThetaGrid();
      const fusion::ThetaSearch search = fusion::GridSearchTheta(tune, config.fusion.threshold, grid);
      out.theta = search.best;
      out.theta_source = "search:" + std::string(SplitName(ts));
      out.theta_grid = search.grid;
      out.theta_errors = search.errors;
    }
    theta_json = Json{{"config_hash", FusionConfigHash(config)},
                      {"theta", *out.theta},
                      {"source", out.theta_source},
                      {"threshold", fusion::ThresholdRuleName(config.fusion.threshold)},
                      {"grid", out.theta_grid},
                      {"errors", out.theta_errors}};
    WriteJson(layout.ThetaFile(), theta_json);
  }

  std::vector<double> sentiment, fused_score;
  std::vector<Label> audio_label, video_label, fused_label;
  std::ostringstream scores, fused;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    sentiment.push_back(*eval.segments[i].sentiment);
    audio_label.push_back(a.distance[i] > 0.0 ? Label::kPositive : Label::kNegative);
    video_label.push_back(v.distance[i] > 0.0 ? Label::kPositive : Label::kNegative);
    const fusion::FusedPrediction f = Fuse(pairs[i], config, out.theta);
    fused_score.push_back(f.fused_score);
    fused_label.push_back(f.label);
    scores << pairs[i].segment_id << " audio " << Num(a.score[i]) << '\n'
           << pairs[i].segment_id << " video " << Num(v.score[i]) << '\n';
    fused << pairs[i].segment_id << ' ' << Num(f.fused_score) << ' ' << Sign(f.label) << '\n';
  }
  out.reports.push_back(metrics::BuildReport("audio", a.score, audio_label, sentiment));
  out.reports.push_back(metrics::BuildReport("video", v.score, video_label, sentiment));
  out.reports.push_back(metrics::BuildReport("fused", fused_score, fused_label, sentiment));

  io::WriteFileAtomic(layout.ScoreFile(split), scores.str());
  io::WriteFileAtomic(layout.FusedFile(split), fused.str());

  std::ostringstream text, confusion;
  text << "split=" << SplitName(split) << '\n' << "fusion=" << FusionModeName(config.fusion.mode) << '\n';
  if (out.theta) text << "theta=" << Num(*out.theta) << '\n' << "theta_source=" << out.theta_source << '\n';
  Json report_json{{"split", SplitName(split)}, {"fusion", FusionModeName(config.fusion.mode)}};
  if (out.theta) report_json["theta"] = theta_json;
  report_json["reports"] = Json::array();
  for (const auto& r : out.reports) {
    text << metrics::ToKeyValue(r);
    report_json["reports"].push_back(Json::parse(metrics::ToJson(r)));
    confusion << r.name << " (" << SplitName(split) << ")\n" << metrics::FormatConfusion(r.confusion) << '\n';
  }
  io::WriteFileAtomic(layout.ReportText(split), text.str());
  io::WriteFileAtomic(layout.ReportJson(split), report_json.dump(2) + "\n");
  io::WriteFileAtomic(layout.ConfusionFile(split), confusion.str());
  return out;
}

std::vector<Prediction> Predict(const Manifest& manifest, const PipelineConfig& config,
                                const ArtifactLayout& layout, const RunOptions& options) {
  if (manifest.empty()) throw PreconditionError("manifest has no segments to predict");
  std::optional<double> theta;
  if (config.fusion.mode == FusionMode::kScore) {
    if (config.fusion.theta) {
      theta = *config.fusion.theta;
    } else if (fs::exists(layout.ThetaFile())) {
      CheckHash(layout.ThetaFile(), FusionConfigHash(config), options.force, "fusion weight");
      theta = ReadJson(layout.ThetaFile()).at("theta").get<double>();
    } else {
      throw Error("no fusion weight available: run evaluate first or pass --theta");
    }
  }
  const SegmentScores a = Score(manifest, Modality::kAudio, config, layout, options);
  const SegmentScores v = Score(manifest, Modality::kVideo, config, layout, options);
  const std::vector<fusion::ScorePair> pairs = Pairs(manifest, a, v);
  std::vector<Prediction> out;
  std::ostringstream os;
  os << "# segment_id\taudio_score\tvideo_score\tfused_score\tlabel\tsentiment\n";
  for (const auto& p : pairs) {
    const fusion::FusedPrediction f = Fuse(p, config, theta);
    Prediction pr{p.segment_id, p.audio, p.video, f.fused_score, f.label,
                  metrics::ScaleConfidence(f.fused_score)};
    os << pr.id << '\t' << Num(pr.audio) << '\t' << Num(pr.video) << '\t' << Num(pr.fused) << '\t'
       << Sign(pr.label) << '\t' << Num(pr.sentiment) << '\n';
    out.push_back(std::move(pr));
  }
  io::WriteFileAtomic(layout.PredictFile(), os.str());
  return out;
}

void RecordStage(const ArtifactLayout& layout, const std::string& stage,
                 const std::string& config_hash, std::uint64_t seed) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  Json j = fs::exists(layout.RunManifest()) ? ReadJson(layout.RunManifest()) : Json::object();
  j["seed"] = seed;
  j["stages"][stage] = Json{{"config_hash", config_hash}, {"completed_at", UtcNow()}};
  WriteJson(layout.RunManifest(), j);
}

}  // namespace mmsent::pipeline
