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

#include "mmsent/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "mmsent/binary_io.hpp"
#include "mmsent/error.hpp"
#include "mmsent/parallel.hpp"
#include "mmsent/rng.hpp"

namespace mmsent::synth {
namespace {

constexpr int kBlobsPerVideo = 2;
constexpr int kTrailSteps = 6;
constexpr double kTrailDecay = 0.6;
constexpr double kTrailSpacing = 2.0;  // pixels between trail copies
constexpr double kBlobSigma = 3.0;
constexpr double kEnvelopeSigma = 3.0;  // frames
constexpr double kBackground = 0.2;

}  // namespace

audio::PcmSignal RenderAudio(const SynthOptions& options, Label label, double intensity,
                             std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> amp_dist(0.3, 0.6), phase_dist(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 0.01);
  const double f0 = label == Label::kPositive
                        ? options.positive_f0_min +
                              intensity * (options.positive_f0_max - options.positive_f0_min)
                        : options.negative_f0_max -
                              intensity * (options.negative_f0_max - options.negative_f0_min);
  const double amp = amp_dist(rng);
  const double phase = phase_dist(rng);
  audio::PcmSignal pcm;
  pcm.sample_rate = options.sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(options.audio_seconds * options.sample_rate));
  pcm.samples.resize(n);
  const double gain = amp / 1.75;  // harmonic weights 1, .5, .25 sum to 1.75
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / options.sample_rate;
    const double w = 2.0 * std::numbers::pi * f0 * t + phase;
    pcm.samples[i] = gain * (std::sin(w) + 0.5 * std::sin(2.0 * w) + 0.25 * std::sin(3.0 * w)) +
                     noise(rng);
  }
  return pcm;
}

video::FrameVolume RenderVideo(const SynthOptions& options, Label label, std::uint64_t seed) {
  Rng rng(seed);
  video::FrameVolume vol(options.frames, options.height, options.width, 25.0,
                         static_cast<float>(kBackground));
  const double vx = label == Label::kPositive ? 1.0 : -1.0;
  const double margin = 2.0 * kBlobSigma;
  std::uniform_real_distribution<double> xd(options.width / 3.0, 2.0 * options.width / 3.0);
  std::uniform_real_distribution<double> yd(margin, options.height - margin);
  std::uniform_real_distribution<double> td(0.3 * options.frames, 0.7 * options.frames);
  std::uniform_real_distribution<double> ad(0.5, 0.7);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int b = 0; b < kBlobsPerVideo; ++b) {
    const double x0 = xd(rng), y0 = yd(rng), tc = td(rng), amp = ad(rng);
    for (int t = 0; t < options.frames; ++t) {
      const double env = amp * std::exp(-0.5 * std::pow((t - tc) / kEnvelopeSigma, 2));
      const double xc = x0 + vx * (t - tc);
      for (int y = 0; y < options.height; ++y) {
        const double gy = std::exp(-0.5 * std::pow((y - y0) / kBlobSigma, 2));
        for (int x = 0; x < options.width; ++x) {
          double v = 0.0, weight = 1.0;
          for (int k = 0; k < kTrailSteps; ++k, weight *= kTrailDecay) {
            const double dx = x - (xc - vx * kTrailSpacing * k);
            v += weight * std::exp(-0.5 * dx * dx / (kBlobSigma * kBlobSigma));
          }
          vol.at(t, y, x) += static_cast<float>(env * gy * v);
        }
      }
    }
  }
  for (float& v : vol.data()) v = std::clamp(static_cast<float>(v + noise(rng)), 0.0f, 1.0f);
  return vol;
}

Manifest GenerateCorpus(const std::filesystem::path& out_dir, const SynthOptions& options) {
  if (options.segments == 0 || options.train > options.segments) {
    throw PreconditionError("synth: need 0 < segments and train <= segments");
  }
  if (options.segments - options.train == 1 || options.train == 1) {
    throw PreconditionError("synth: each non-empty split needs at least 2 segments");
  }
  Rng rng(DeriveSeed(options.seed, "synth-labels", 0));
  std::vector<SegmentDraw> draws(options.segments);
  auto assign = [&](std::size_t begin, std::size_t end) {
    std::vector<Label> labels;
    for (std::size_t i = begin; i < end; ++i) {
      labels.push_back((i - begin) * 2 < end - begin ? Label::kPositive : Label::kNegative);
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = begin; i < end; ++i) draws[i].label = labels[i - begin];
  };
  assign(0, options.train);
  assign(options.train, options.segments);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& d : draws) d.intensity = u(rng);

  Manifest manifest;
  manifest.base_dir = out_dir;
  for (std::size_t i = 0; i < options.segments; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn%04zu", i);
    SegmentRecord r;
    r.id = id;
    r.audio = "audio/" + r.id + ".pcm";
    r.video = "video/" + r.id + ".fvl";
    const double magnitude = 0.5 + 2.5 * draws[i].intensity;
    r.sentiment = draws[i].label == Label::kPositive ? magnitude : -magnitude;
    r.split = i < options.train ? Split::kTrain : Split::kValidation;
    manifest.segments.push_back(std::move(r));
  }
  ParallelFor(options.segments, options.workers, [&](std::size_t i) {
    const auto& r = manifest.segments[i];
    audio::WritePcm(out_dir / r.audio, RenderAudio(options, draws[i].label, draws[i].intensity,
                                                   DeriveSeed(options.seed, "synth-audio", i)));
    video::WriteVolume(out_dir / r.video,
                       RenderVideo(options, draws[i].label, DeriveSeed(options.seed, "synth-video", i)));
  });
  io::WriteFileAtomic(out_dir / "manifest.jsonl", SerializeManifest(manifest));
  return manifest;
}

}  // namespace mmsent::synth
