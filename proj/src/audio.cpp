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

#include "mmsent/audio.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "mmsent/binary_io.hpp"
#include "mmsent/error.hpp"

namespace mmsent::audio {

namespace {

// FFTW planning is not thread-safe, executing a finished plan on new arrays
// is. Plans are created once per size under a lock and never destroyed.
fftw_plan R2cPlan(int n) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  plans.emplace(n, plan);
  return plan;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Magnitude spectrum of the zero-padded block.
std::vector<double> MagnitudeSpectrum(std::span<const double> block, std::size_t fft_size) {
  const int n = static_cast<int>(fft_size);
  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(fft_size));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(fft_size / 2 + 1));
  std::fill(in.get(), in.get() + fft_size, 0.0);
  std::copy(block.begin(), block.end(), in.get());
  fftw_execute_dft_r2c(R2cPlan(n), in.get(), out.get());
  std::vector<double> mag(fft_size / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    mag[k] = std::hypot(out.get()[k][0], out.get()[k][1]);
  }
  return mag;
}

double InterpolateMagnitude(const std::vector<double>& mag, double bin) {
  if (bin < 0.0) return 0.0;
  auto lo = static_cast<std::size_t>(bin);
  if (lo + 1 >= mag.size()) return 0.0;
  double frac = bin - static_cast<double>(lo);
  return mag[lo] * (1.0 - frac) + mag[lo + 1] * frac;
}

fftw_plan C2rPlan(int n) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  fftw_complex* in = fftw_alloc_complex(n / 2 + 1);
  double* out = fftw_alloc_real(n);
  fftw_plan plan = fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  plans.emplace(n, plan);
  return plan;
}

// r[lag] = sum_i x[i] * x[i + lag], via the power spectrum of the block
// zero-padded past twice its length (no circular wrap).
std::vector<double> Autocorrelation(std::span<const double> block) {
  const std::size_t n = block.size();
  const std::size_t fft_size = NextPow2(2 * n);
  const int fn = static_cast<int>(fft_size);
  std::unique_ptr<double, FftwDeleter> buf(fftw_alloc_real(fft_size));
  std::unique_ptr<fftw_complex, FftwDeleter> spec(fftw_alloc_complex(fft_size / 2 + 1));
  std::fill(buf.get(), buf.get() + fft_size, 0.0);
  std::copy(block.begin(), block.end(), buf.get());
  fftw_execute_dft_r2c(R2cPlan(fn), buf.get(), spec.get());
  for (std::size_t k = 0; k <= fft_size / 2; ++k) {
    auto& c = spec.get()[k];
    c[0] = c[0] * c[0] + c[1] * c[1];
    c[1] = 0.0;
  }
  fftw_execute_dft_c2r(C2rPlan(fn), spec.get(), buf.get());
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = buf.get()[i] / static_cast<double>(fft_size);
  return r;
}

double Rms(std::span<const double> block) {
  if (block.empty()) return 0.0;
  double ss = 0.0;
  for (double v : block) ss += v * v;
  return std::sqrt(ss / static_cast<double>(block.size()));
}

}  // namespace

std::vector<double> HannWindow(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n - 1));
  }
  return w;
}

std::size_t FrameCount(std::size_t n_samples, std::size_t window, std::size_t hop) {
  if (window == 0 || hop == 0 || n_samples < window) return 0;
  return (n_samples - window) / hop + 1;
}

std::vector<std::vector<double>> FrameSignal(const PcmSignal& signal, double window, double hop) {
  if (!(hop > 0.0) || window < hop) {
    throw PreconditionError("frame_signal requires window >= hop > 0");
  }
  if (signal.sample_rate == 0) throw PreconditionError("sample rate must be positive");
  auto win = static_cast<std::size_t>(std::lround(window * signal.sample_rate));
  auto step = static_cast<std::size_t>(std::lround(hop * signal.sample_rate));
  if (win == 0 || step == 0) throw PreconditionError("window or hop rounds to zero samples");
  std::size_t count = FrameCount(signal.samples.size(), win, step);
  if (count == 0) {
    throw PreconditionError("signal of " + std::to_string(signal.samples.size()) +
                            " samples is shorter than one " + std::to_string(win) +
                            "-sample window");
  }
  auto hann = HannWindow(win);
  std::vector<std::vector<double>> blocks(count, std::vector<double>(win));
  for (std::size_t f = 0; f < count; ++f) {
    const double* src = signal.samples.data() + f * step;
    for (std::size_t i = 0; i < win; ++i) blocks[f][i] = src[i] * hann[i];
  }
  return blocks;
}

F0Estimate EstimateF0Shs(std::span<const double> block, std::uint32_t sample_rate,
                         double f0_min, double f0_max, const ShsParams& params) {
  if (!(f0_min > 0.0 && f0_min < f0_max && f0_max < sample_rate / 2.0)) {
    throw PreconditionError("SHS requires 0 < f0_min < f0_max < sample_rate/2");
  }
  if (block.empty()) return {};
  bool all_zero = std::all_of(block.begin(), block.end(), [](double v) { return v == 0.0; });
  if (all_zero) return {f0_min, 0.0};

  const std::size_t fft_size = NextPow2(std::max<std::size_t>(8 * block.size(), 1024));
  const auto mag = MagnitudeSpectrum(block, fft_size);
  const double bins_per_hz = static_cast<double>(fft_size) / sample_rate;

  // Candidate grid with both range endpoints on it, plus one guard point on
  // each side for the parabolic fit.
  const double octaves = std::log2(f0_max / f0_min);
  const int intervals = std::max(1, static_cast<int>(std::ceil(octaves * params.points_per_octave)));
  const double log_step = octaves / intervals;

  auto score = [&](double f) {
    double s = 0.0;
    double weight = 1.0;
    for (int h = 1; h <= params.subharmonics; ++h) {
      s += weight * InterpolateMagnitude(mag, h * f * bins_per_hz);
      weight *= params.compression;
    }
    return s;
  };

  std::vector<double> scores(static_cast<std::size_t>(intervals) + 3);
  for (int k = -1; k <= intervals + 1; ++k) {
    scores[static_cast<std::size_t>(k + 1)] = score(f0_min * std::exp2(k * log_step));
  }
  int best = 0;
  for (int k = 1; k <= intervals; ++k) {
    if (scores[static_cast<std::size_t>(k + 1)] > scores[static_cast<std::size_t>(best + 1)]) {
      best = k;
    }
  }
  const double left = scores[static_cast<std::size_t>(best)];
  const double mid = scores[static_cast<std::size_t>(best + 1)];
  const double right = scores[static_cast<std::size_t>(best + 2)];
  double offset = 0.0;
  double peak = mid;
  const double denom = left - 2.0 * mid + right;
  if (denom < 0.0) {
    offset = std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
    peak = mid - 0.25 * (left - right) * offset;
  }
  double f0 = std::clamp(f0_min * std::exp2((best + offset) * log_step), f0_min, f0_max);
  return {f0, std::max(0.0, peak)};
}

double VoicingProbability(std::span<const double> block, double salience,
                          std::uint32_t sample_rate, double f0_min, double f0_max) {
  if (!(salience > 0.0) || block.size() < 2) return 0.0;
  const std::size_t n = block.size();
  // prefix[i] = sum of squares of block[0..i)
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + block[i] * block[i];
  if (!(prefix[n] > 0.0) || !std::isfinite(prefix[n])) return 0.0;

  auto min_lag = static_cast<std::size_t>(std::max(1.0, std::floor(sample_rate / f0_max)));
  auto max_lag = static_cast<std::size_t>(std::ceil(sample_rate / f0_min));
  max_lag = std::min(max_lag, n - 1);
  if (min_lag > max_lag) return 0.0;

  const auto cross = Autocorrelation(block);
  double best = 0.0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    const double e0 = prefix[n - lag];
    const double e1 = prefix[n] - prefix[lag];
    if (e0 > 0.0 && e1 > 0.0) best = std::max(best, cross[lag] / std::sqrt(e0 * e1));
  }
  if (!std::isfinite(best)) return 0.0;
  return std::clamp(best, 0.0, 1.0);
}

double Loudness(std::span<const double> block) { return std::pow(Rms(block), 0.3); }

ProsodyTrack ExtractProsody(const PcmSignal& signal, const ProsodyConfig& config) {
  auto blocks = FrameSignal(signal, config.window, config.hop);
  const ShsParams shs{config.subharmonics, config.compression, config.points_per_octave};
  // Compensates the Hann taper so a full-scale stationary signal keeps its
  // unwindowed loudness.
  const double window_loudness = Loudness(HannWindow(blocks.front().size()));

  ProsodyTrack track;
  track.frame_period = std::lround(config.hop * signal.sample_rate) /
                       static_cast<double>(signal.sample_rate);
  track.frames.reserve(blocks.size());
  for (const auto& block : blocks) {
    ProsodyFrame frame;
    auto est = EstimateF0Shs(block, signal.sample_rate, config.f0_min, config.f0_max, shs);
    frame.voicing =
        VoicingProbability(block, est.salience, signal.sample_rate, config.f0_min, config.f0_max);
    frame.f0 = frame.voicing >= config.voicing_threshold ? est.f0 : 0.0;
    frame.loudness = window_loudness > 0.0 ? Loudness(block) / window_loudness : 0.0;
    track.frames.push_back(frame);
  }
  return track;
}

DescriptorSet ProsodyDescriptors(const ProsodyTrack& track, const ProsodyConfig& config,
                                 std::string segment_id) {
  DescriptorSet set(std::move(segment_id), 3);
  for (const auto& f : track.frames) {
    const double row[3] = {f.f0 / config.f0_max, f.voicing, f.loudness};
    set.Append(std::span<const double>(row));
  }
  return set;
}

PcmSignal ReadPcm(const std::filesystem::path& path, std::optional<std::uint32_t> fallback_rate) {
  auto bytes = io::ReadFile(path);
  io::ByteReader r(bytes, path.string());
  PcmSignal signal;
  std::uint64_t count = 0;
  if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == "PCM1") {
    r.ExpectMagic("PCM1");
    signal.sample_rate = r.U32();
    count = r.U64();
    if (count * 2 != r.remaining()) throw FormatError(path.string() + ": sample count mismatch");
  } else {
    if (!fallback_rate) {
      throw FormatError(path.string() + ": headerless PCM needs a sample rate");
    }
    signal.sample_rate = *fallback_rate;
    if (bytes.size() % 2 != 0) throw FormatError(path.string() + ": odd byte count");
    count = bytes.size() / 2;
  }
  if (signal.sample_rate == 0) throw FormatError(path.string() + ": zero sample rate");
  signal.samples.resize(count);
  for (auto& s : signal.samples) {
    s = static_cast<std::int16_t>(r.U16()) / 32768.0;
  }
  return signal;
}

void WritePcm(const std::filesystem::path& path, const PcmSignal& signal) {
  io::ByteWriter w;
  w.Magic("PCM1");
  w.U32(signal.sample_rate);
  w.U64(signal.samples.size());
  for (double s : signal.samples) {
    double q = std::clamp(std::round(s * 32767.0), -32768.0, 32767.0);
    w.U16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  io::WriteFileAtomic(path, w.data());
}

}  // namespace mmsent::audio
