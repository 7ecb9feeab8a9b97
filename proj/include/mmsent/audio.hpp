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

// Frame-level prosody: fundamental frequency by sub-harmonic summation,
// voicing probability from normalized autocorrelation, and loudness.
//
// Audio files are 16-bit signed little-endian mono PCM, either headerless or
// prefixed with a 16-byte header:
//   char[4] "PCM1" | u32 sample_rate | u64 sample_count

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mmsent/descriptors.hpp"

namespace mmsent::audio {

struct PcmSignal {
  std::vector<double> samples;  // amplitudes in [-1, 1]
  std::uint32_t sample_rate = 16000;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

struct ProsodyConfig {
  double window = 0.050;  // seconds
  double hop = 0.010;     // seconds
  double f0_min = 55.0;   // Hz
  double f0_max = 400.0;  // Hz
  int subharmonics = 5;
  double compression = 0.85;
  double voicing_threshold = 0.45;
  int points_per_octave = 48;
};

struct ShsParams {
  int subharmonics = 5;
  double compression = 0.85;
  int points_per_octave = 48;
};

struct F0Estimate {
  double f0 = 0.0;
  double salience = 0.0;
};

struct ProsodyFrame {
  double f0 = 0.0;  // Hz, 0 when unvoiced
  double voicing = 0.0;
  double loudness = 0.0;
};

struct ProsodyTrack {
  std::vector<ProsodyFrame> frames;
  double frame_period = 0.0;  // seconds
};

/// Hann window of length n (symmetric, w[0] = w[n-1] = 0).
std::vector<double> HannWindow(std::size_t n);

/// Number of blocks frame_signal would produce, or 0 if the signal is shorter
/// than one window.
std::size_t FrameCount(std::size_t n_samples, std::size_t window, std::size_t hop);

/// Hann-weighted blocks of round(window*rate) samples spaced round(hop*rate).
/// Throws PreconditionError if window < hop, hop <= 0 or the signal is shorter
/// than one window.
std::vector<std::vector<double>> FrameSignal(const PcmSignal& signal, double window, double hop);

/// Sub-harmonic summation over a log-frequency candidate grid; the winning
/// candidate is refined by parabolic interpolation. An all-zero block yields
/// salience 0.
F0Estimate EstimateF0Shs(std::span<const double> block, std::uint32_t sample_rate,
                         double f0_min, double f0_max, const ShsParams& params = {});

/// Largest normalized cross-correlation between the block and its lagged copy
/// over lags covering [f0_min, f0_max], clamped to [0, 1]. Zero-energy blocks
/// and zero salience give 0.
double VoicingProbability(std::span<const double> block, double salience,
                          std::uint32_t sample_rate, double f0_min = 55.0,
                          double f0_max = 400.0);

/// RMS^0.3.
double Loudness(std::span<const double> block);

ProsodyTrack ExtractProsody(const PcmSignal& signal, const ProsodyConfig& config = {});

/// One 3-dimensional row per frame: (f0 / f0_max, voicing, loudness).
DescriptorSet ProsodyDescriptors(const ProsodyTrack& track, const ProsodyConfig& config,
                                 std::string segment_id);

/// Reads PCM1 or headerless PCM; headerless files need `fallback_rate`.
PcmSignal ReadPcm(const std::filesystem::path& path,
                  std::optional<std::uint32_t> fallback_rate = std::nullopt);
/// Writes the PCM1 variant; samples are clipped to [-1, 1] and quantized.
void WritePcm(const std::filesystem::path& path, const PcmSignal& signal);

}  // namespace mmsent::audio
