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

// Synthetic two-class corpus: harmonic tones whose pitch band depends on the
// class, and video of Gaussian blobs that fade in and out while drifting
// right (positive) or left (negative) with a fading trail behind them.

#pragma once

#include <cstdint>
#include <filesystem>

#include "mmsent/audio.hpp"
#include "mmsent/corpus.hpp"
#include "mmsent/video.hpp"

namespace mmsent::synth {

struct SynthOptions {
  std::size_t segments = 200;
  std::size_t train = 150;  // the rest goes to validation
  std::uint64_t seed = 7;
  double audio_seconds = 1.0;
  std::uint32_t sample_rate = 16000;
  int frames = 24;
  int height = 48;
  int width = 48;
  double positive_f0_min = 280.0, positive_f0_max = 360.0;
  double negative_f0_min = 100.0, negative_f0_max = 160.0;
  int workers = 1;
};

/// In [0, 1]: position of the segment inside its class range. Sentiment
/// magnitude and pitch both grow with it.
struct SegmentDraw {
  Label label = Label::kPositive;
  double intensity = 0.0;
};

audio::PcmSignal RenderAudio(const SynthOptions& options, Label label, double intensity,
                             std::uint64_t seed);
video::FrameVolume RenderVideo(const SynthOptions& options, Label label, std::uint64_t seed);

/// Writes audio/<id>.pcm, video/<id>.fvl and manifest.jsonl under out_dir
/// and returns the manifest. Each split is balanced between the classes
/// (odd counts give the extra segment to the positive class).
Manifest GenerateCorpus(const std::filesystem::path& out_dir, const SynthOptions& options);

}  // namespace mmsent::synth
