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

// Spatiotemporal interest points (box-filter Hessian over space and time)
// described with upright 64-value SURF descriptors.
//
// Raw video file ("FVL1"), little-endian:
//   char[4] "FVL1" | u32 T | u32 H | u32 W | u32 frame_rate_milliHz |
//   T*H*W u8 intensities, frame-major then row-major

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mmsent/descriptors.hpp"

namespace mmsent::video {

class FrameVolume {
 public:
  static constexpr int kMinFrames = 3;
  static constexpr int kMinSide = 16;

  FrameVolume() = default;
  /// Throws PreconditionError below 3 frames or 16x16 pixels.
  FrameVolume(int frames, int height, int width, double frame_rate = 25.0, float fill = 0.0f);

  int frames() const { return t_; }
  int height() const { return h_; }
  int width() const { return w_; }
  double frame_rate() const { return frame_rate_; }

  float& at(int t, int y, int x) { return data_[Index(t, y, x)]; }
  float at(int t, int y, int x) const { return data_[Index(t, y, x)]; }
  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  std::size_t Index(int t, int y, int x) const {
    return (static_cast<std::size_t>(t) * h_ + y) * w_ + x;
  }
  int t_ = 0, h_ = 0, w_ = 0;
  double frame_rate_ = 25.0;
  std::vector<float> data_;
};

/// Half-open axis-aligned space-time box.
struct Box {
  int t0, t1, y0, y1, x0, x1;
};

class IntegralVolume {
 public:
  explicit IntegralVolume(const FrameVolume& volume);

  int frames() const { return t_; }
  int height() const { return h_; }
  int width() const { return w_; }

  /// Sum of intensities inside the box after clipping it to the volume.
  /// Empty boxes sum to 0.
  double BoxSum(const Box& box) const;

 private:
  double At(int t, int y, int x) const {
    return sums_[(static_cast<std::size_t>(t) * (h_ + 1) + y) * (w_ + 1) + x];
  }
  int t_, h_, w_;
  std::vector<double> sums_;  // (T+1) x (H+1) x (W+1), zero first plane/row/column
};

struct Scale {
  double sigma_s = 1.2;  // pixels
  double sigma_t = 1.0;  // frames
};

struct ScaleLadder {
  std::vector<double> spatial{1.2, 2.4, 4.8};
  std::vector<double> temporal{1.0, 2.0, 4.0};

  std::size_t size() const { return spatial.size() * temporal.size(); }
  /// Spatial-major order: index = is * temporal.size() + it.
  Scale at(std::size_t is, std::size_t it) const { return {spatial[is], temporal[it]}; }
};

/// Box-filter lobe length (odd) for a Gaussian scale.
int LobeLength(double sigma);

/// Half-extent of the filter bank around the centre, in pixels and frames.
struct Support {
  int spatial;
  int temporal;
};
Support FilterSupport(const Scale& scale);
bool FitsSupport(const IntegralVolume& iv, int x, int y, int t, const Scale& scale);

struct HessianComponents {
  double dxx, dyy, dtt, dxy, dxt, dyt;
};

/// Area-normalized box approximations of the six second derivatives. Throws
/// PreconditionError if the filters do not fit at (x, y, t).
HessianComponents HessianAt(const IntegralVolume& iv, int x, int y, int t, const Scale& scale);

/// Determinant of the 3x3 Hessian with mixed terms weighted by 0.9.
double HessianDeterminant(const HessianComponents& h);

double HessianResponse(const IntegralVolume& iv, int x, int y, int t, const Scale& scale);

struct InterestPoint {
  int x = 0;
  int y = 0;
  int t = 0;
  double sigma_s = 0.0;
  double sigma_t = 0.0;
  double response = 0.0;  // |det H|
  std::uint32_t scale_index = 0;
};

/// Strict local maxima of |det H| over 3x3x3 positions and the adjacent scale
/// ladder entries, above `threshold`, by descending response.
std::vector<InterestPoint> Detect(const IntegralVolume& iv, const ScaleLadder& ladder,
                                  double threshold);

inline constexpr std::size_t kSurfDims = 64;
using SurfDescriptor = std::array<float, kSurfDims>;

/// Upright SURF over a 20*sigma_s patch of the frames within +-sigma_t of the
/// point, averaged. Unit L2 norm, or all zeros for a constant patch.
SurfDescriptor Describe(const FrameVolume& volume, const InterestPoint& point);

struct VideoConfig {
  ScaleLadder ladder;
  double threshold = 1e-4;
  std::size_t max_points = 400;
};

DescriptorSet ExtractVideoDescriptors(const FrameVolume& volume, const VideoConfig& config,
                                      std::string segment_id);

FrameVolume ReadVolume(const std::filesystem::path& path);
/// Intensities are clipped to [0, 1] and quantized to 8 bits.
void WriteVolume(const std::filesystem::path& path, const FrameVolume& volume);

}  // namespace mmsent::video
