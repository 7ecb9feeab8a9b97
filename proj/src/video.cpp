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

#include "mmsent/video.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "mmsent/binary_io.hpp"
#include "mmsent/error.hpp"

namespace mmsent::video {

FrameVolume::FrameVolume(int frames, int height, int width, double frame_rate, float fill)
    : t_(frames), h_(height), w_(width), frame_rate_(frame_rate) {
  if (frames < kMinFrames || height < kMinSide || width < kMinSide) {
    throw PreconditionError("frame volume must be at least 3x16x16, got " +
                            std::to_string(frames) + "x" + std::to_string(height) + "x" +
                            std::to_string(width));
  }
  if (!(frame_rate > 0.0)) throw PreconditionError("frame rate must be positive");
  data_.assign(static_cast<std::size_t>(t_) * h_ * w_, fill);
}

IntegralVolume::IntegralVolume(const FrameVolume& v)
    : t_(v.frames()), h_(v.height()), w_(v.width()),
      sums_(static_cast<std::size_t>(t_ + 1) * (h_ + 1) * (w_ + 1), 0.0) {
  auto idx = [&](int t, int y, int x) {
    return (static_cast<std::size_t>(t) * (h_ + 1) + y) * (w_ + 1) + x;
  };
  for (int t = 0; t < t_; ++t) {
    for (int y = 0; y < h_; ++y) {
      double row = 0.0;
      for (int x = 0; x < w_; ++x) {
        row += v.at(t, y, x);
        // 2D prefix within the frame plus the previous frame's plane.
        sums_[idx(t + 1, y + 1, x + 1)] =
            row + sums_[idx(t + 1, y, x + 1)] + sums_[idx(t, y + 1, x + 1)] - sums_[idx(t, y, x + 1)];
      }
    }
  }
}

double IntegralVolume::BoxSum(const Box& b) const {
  const int t0 = std::max(b.t0, 0), t1 = std::min(b.t1, t_);
  const int y0 = std::max(b.y0, 0), y1 = std::min(b.y1, h_);
  const int x0 = std::max(b.x0, 0), x1 = std::min(b.x1, w_);
  if (t0 >= t1 || y0 >= y1 || x0 >= x1) return 0.0;
  return At(t1, y1, x1) - At(t0, y1, x1) - At(t1, y0, x1) - At(t1, y1, x0) + At(t0, y0, x1) +
         At(t0, y1, x0) + At(t1, y0, x0) - At(t0, y0, x0);
}

int LobeLength(double sigma) { return 2 * static_cast<int>(std::floor(1.25 * sigma)) + 1; }

Support FilterSupport(const Scale& scale) {
  const int l = LobeLength(scale.sigma_s);
  const int lt = LobeLength(scale.sigma_t);
  return {(3 * l - 1) / 2, (3 * lt - 1) / 2};
}

bool FitsSupport(const IntegralVolume& iv, int x, int y, int t, const Scale& scale) {
  const auto s = FilterSupport(scale);
  return x - s.spatial >= 0 && x + s.spatial < iv.width() && y - s.spatial >= 0 &&
         y + s.spatial < iv.height() && t - s.temporal >= 0 && t + s.temporal < iv.frames();
}

namespace {

// Inclusive ranges along each axis.
struct Range {
  int lo, hi;
};

double Sum(const IntegralVolume& iv, Range t, Range y, Range x) {
  return iv.BoxSum({t.lo, t.hi + 1, y.lo, y.hi + 1, x.lo, x.hi + 1});
}

// Three lobes (+1, -2, +1) of length l along one axis centred on c.
std::array<Range, 3> Lobes(int c, int l) {
  const int half = (l - 1) / 2;
  const int reach = (3 * l - 1) / 2;
  return {Range{c - reach, c - half - 1}, Range{c - half, c + half}, Range{c + half + 1, c + reach}};
}

// Negative and positive wings of a mixed-derivative filter along one axis.
std::array<Range, 2> Wings(int c, int l) { return {Range{c - l, c - 1}, Range{c + 1, c + l}}; }

Range Span(int c, int l) { return {c - (l - 1), c + (l - 1)}; }

}  // namespace

HessianComponents HessianAt(const IntegralVolume& iv, int x, int y, int t, const Scale& scale) {
  if (!FitsSupport(iv, x, y, t, scale)) {
    throw PreconditionError("Hessian filter support does not fit at (" + std::to_string(x) + ", " +
                            std::to_string(y) + ", " + std::to_string(t) + ")");
  }
  const int l = LobeLength(scale.sigma_s);
  const int lt = LobeLength(scale.sigma_t);
  const double straight_s = 3.0 * l * (2 * l - 1) * (2 * lt - 1);
  const double straight_t = 3.0 * lt * (2 * l - 1) * (2 * l - 1);

  HessianComponents h{};
  {
    auto lx = Lobes(x, l);
    auto sy = Span(y, l), st = Span(t, lt);
    h.dxx = (Sum(iv, st, sy, lx[0]) - 2.0 * Sum(iv, st, sy, lx[1]) + Sum(iv, st, sy, lx[2])) /
            straight_s;
  }
  {
    auto ly = Lobes(y, l);
    auto sx = Span(x, l), st = Span(t, lt);
    h.dyy = (Sum(iv, st, ly[0], sx) - 2.0 * Sum(iv, st, ly[1], sx) + Sum(iv, st, ly[2], sx)) /
            straight_s;
  }
  {
    auto lt3 = Lobes(t, lt);
    auto sx = Span(x, l), sy = Span(y, l);
    h.dtt = (Sum(iv, lt3[0], sy, sx) - 2.0 * Sum(iv, lt3[1], sy, sx) + Sum(iv, lt3[2], sy, sx)) /
            straight_t;
  }
  // Mixed terms: (++) + (--) - (+-) - (-+) over the two wing axes.
  auto mixed = [](auto&& sum_at, const std::array<Range, 2>& a, const std::array<Range, 2>& b,
                  double area) {
    return (sum_at(a[1], b[1]) + sum_at(a[0], b[0]) - sum_at(a[1], b[0]) - sum_at(a[0], b[1])) /
           area;
  };
  {
    auto st = Span(t, lt);
    h.dxy = mixed([&](Range rx, Range ry) { return Sum(iv, st, ry, rx); }, Wings(x, l), Wings(y, l),
                  4.0 * l * l * (2 * lt - 1));
  }
  {
    auto sy = Span(y, l);
    h.dxt = mixed([&](Range rx, Range rt) { return Sum(iv, rt, sy, rx); }, Wings(x, l),
                  Wings(t, lt), 4.0 * l * lt * (2 * l - 1));
  }
  {
    auto sx = Span(x, l);
    h.dyt = mixed([&](Range ry, Range rt) { return Sum(iv, rt, ry, sx); }, Wings(y, l),
                  Wings(t, lt), 4.0 * l * lt * (2 * l - 1));
  }
  return h;
}

double HessianDeterminant(const HessianComponents& h) {
  constexpr double w = 0.9;
  const double xy = w * h.dxy, xt = w * h.dxt, yt = w * h.dyt;
  return h.dxx * (h.dyy * h.dtt - yt * yt) - xy * (xy * h.dtt - yt * xt) +
         xt * (xy * yt - h.dyy * xt);
}

double HessianResponse(const IntegralVolume& iv, int x, int y, int t, const Scale& scale) {
  return HessianDeterminant(HessianAt(iv, x, y, t, scale));
}

std::vector<InterestPoint> Detect(const IntegralVolume& iv, const ScaleLadder& ladder,
                                  double threshold) {
  std::vector<InterestPoint> points;
  if (ladder.size() == 0) return points;
  const int T = iv.frames(), H = iv.height(), W = iv.width();
  const std::size_t plane = static_cast<std::size_t>(T) * H * W;
  const std::size_t ns = ladder.spatial.size(), nt = ladder.temporal.size();
  auto voxel = [&](int t, int y, int x) { return (static_cast<std::size_t>(t) * H + y) * W + x; };

  // |det H| per ladder entry; -1 marks positions where the filters do not fit.
  std::vector<std::vector<float>> maps(ladder.size(), std::vector<float>(plane, -1.0f));
  for (std::size_t is = 0; is < ns; ++is) {
    for (std::size_t it = 0; it < nt; ++it) {
      const Scale sc = ladder.at(is, it);
      const auto sup = FilterSupport(sc);
      auto& map = maps[is * nt + it];
      for (int t = sup.temporal; t < T - sup.temporal; ++t) {
        for (int y = sup.spatial; y < H - sup.spatial; ++y) {
          for (int x = sup.spatial; x < W - sup.spatial; ++x) {
            map[voxel(t, y, x)] = static_cast<float>(std::abs(HessianResponse(iv, x, y, t, sc)));
          }
        }
      }
    }
  }

  for (std::size_t is = 0; is < ns; ++is) {
    for (std::size_t it = 0; it < nt; ++it) {
      const auto& map = maps[is * nt + it];
      for (int t = 0; t < T; ++t) {
        for (int y = 0; y < H; ++y) {
          for (int x = 0; x < W; ++x) {
            const float r = map[voxel(t, y, x)];
            if (!(r > threshold)) continue;
            bool is_max = true;
            for (int ds = -1; ds <= 1 && is_max; ++ds) {
              const auto js = static_cast<std::ptrdiff_t>(is) + ds;
              if (js < 0 || js >= static_cast<std::ptrdiff_t>(ns)) continue;
              for (int dts = -1; dts <= 1 && is_max; ++dts) {
                const auto jt = static_cast<std::ptrdiff_t>(it) + dts;
                if (jt < 0 || jt >= static_cast<std::ptrdiff_t>(nt)) continue;
                const auto& other = maps[static_cast<std::size_t>(js) * nt + static_cast<std::size_t>(jt)];
                for (int dt = -1; dt <= 1 && is_max; ++dt) {
                  const int tt = t + dt;
                  if (tt < 0 || tt >= T) continue;
                  for (int dy = -1; dy <= 1 && is_max; ++dy) {
                    const int yy = y + dy;
                    if (yy < 0 || yy >= H) continue;
                    for (int dx = -1; dx <= 1; ++dx) {
                      const int xx = x + dx;
                      if (xx < 0 || xx >= W) continue;
                      if (ds == 0 && dts == 0 && dt == 0 && dy == 0 && dx == 0) continue;
                      if (other[voxel(tt, yy, xx)] >= r) {
                        is_max = false;
                        break;
                      }
                    }
                  }
                }
              }
            }
            if (is_max) {
              points.push_back({x, y, t, ladder.spatial[is], ladder.temporal[it], r,
                                static_cast<std::uint32_t>(is * nt + it)});
            }
          }
        }
      }
    }
  }
  std::stable_sort(points.begin(), points.end(), [](const InterestPoint& a, const InterestPoint& b) {
    if (a.response != b.response) return a.response > b.response;
    return std::tie(a.scale_index, a.t, a.y, a.x) < std::tie(b.scale_index, b.t, b.y, b.x);
  });
  return points;
}

namespace {

// Frame-averaged grey image with its 2D integral.
class AveragedPatch {
 public:
  AveragedPatch(const FrameVolume& v, int t_lo, int t_hi) : h_(v.height()), w_(v.width()) {
    image_.assign(static_cast<std::size_t>(h_) * w_, 0.0);
    const double inv = 1.0 / (t_hi - t_lo + 1);
    for (int t = t_lo; t <= t_hi; ++t) {
      for (int y = 0; y < h_; ++y) {
        for (int x = 0; x < w_; ++x) image_[static_cast<std::size_t>(y) * w_ + x] += v.at(t, y, x) * inv;
      }
    }
    sums_.assign(static_cast<std::size_t>(h_ + 1) * (w_ + 1), 0.0);
    for (int y = 0; y < h_; ++y) {
      double row = 0.0;
      for (int x = 0; x < w_; ++x) {
        row += image_[static_cast<std::size_t>(y) * w_ + x];
        sums_[static_cast<std::size_t>(y + 1) * (w_ + 1) + x + 1] =
            row + sums_[static_cast<std::size_t>(y) * (w_ + 1) + x + 1];
      }
    }
  }

  // Mean over the clipped half-open box; nullopt-like NaN when empty.
  double Mean(int y0, int y1, int x0, int x1) const {
    y0 = std::max(y0, 0), y1 = std::min(y1, h_);
    x0 = std::max(x0, 0), x1 = std::min(x1, w_);
    if (y0 >= y1 || x0 >= x1) return std::nan("");
    auto s = [&](int y, int x) { return sums_[static_cast<std::size_t>(y) * (w_ + 1) + x]; };
    double sum = s(y1, x1) - s(y0, x1) - s(y1, x0) + s(y0, x0);
    return sum / (static_cast<double>(y1 - y0) * (x1 - x0));
  }

  // Range of pixel values in the clipped box [y0,y1) x [x0,x1).
  std::pair<double, double> MinMax(int y0, int y1, int x0, int x1) const {
    y0 = std::max(y0, 0), y1 = std::min(y1, h_);
    x0 = std::max(x0, 0), x1 = std::min(x1, w_);
    double lo = INFINITY, hi = -INFINITY;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        double v = image_[static_cast<std::size_t>(y) * w_ + x];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    return {lo, hi};
  }

 private:
  int h_, w_;
  std::vector<double> image_;
  std::vector<double> sums_;
};

}  // namespace

SurfDescriptor Describe(const FrameVolume& volume, const InterestPoint& p) {
  SurfDescriptor out{};
  const int dt = static_cast<int>(std::lround(p.sigma_t));
  const int t_lo = std::clamp(p.t - dt, 0, volume.frames() - 1);
  const int t_hi = std::clamp(p.t + dt, 0, volume.frames() - 1);
  const AveragedPatch patch(volume, t_lo, t_hi);

  const double s = p.sigma_s;
  const int haar = std::max(1, static_cast<int>(std::lround(s)));
  const int reach = static_cast<int>(std::ceil(10.0 * s)) + haar;
  auto [lo, hi] = patch.MinMax(p.y - reach, p.y + reach + 1, p.x - reach, p.x + reach + 1);
  if (!(hi - lo > 1e-7 * std::max(1.0, std::max(std::abs(lo), std::abs(hi))))) return out;

  std::array<double, kSurfDims> acc{};
  const double gauss = 3.3 * s;
  for (int j = 0; j < 20; ++j) {
    for (int i = 0; i < 20; ++i) {
      const double ox = (i - 9.5) * s;
      const double oy = (j - 9.5) * s;
      const int px = static_cast<int>(std::lround(p.x + ox));
      const int py = static_cast<int>(std::lround(p.y + oy));
      const double right = patch.Mean(py - haar, py + haar, px, px + haar);
      const double left = patch.Mean(py - haar, py + haar, px - haar, px);
      const double bottom = patch.Mean(py, py + haar, px - haar, px + haar);
      const double top = patch.Mean(py - haar, py, px - haar, px + haar);
      const double dx = (std::isnan(right) || std::isnan(left)) ? 0.0 : right - left;
      const double dy = (std::isnan(bottom) || std::isnan(top)) ? 0.0 : bottom - top;
      const double g = std::exp(-(ox * ox + oy * oy) / (2.0 * gauss * gauss));
      const std::size_t cell = static_cast<std::size_t>((j / 5) * 4 + (i / 5)) * 4;
      acc[cell + 0] += g * dx;
      acc[cell + 1] += g * dy;
      acc[cell + 2] += g * std::abs(dx);
      acc[cell + 3] += g * std::abs(dy);
    }
  }
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) return out;
  for (std::size_t k = 0; k < kSurfDims; ++k) out[k] = static_cast<float>(acc[k] / norm);
  return out;
}

DescriptorSet ExtractVideoDescriptors(const FrameVolume& volume, const VideoConfig& config,
                                      std::string segment_id) {
  DescriptorSet set(std::move(segment_id), kSurfDims);
  const IntegralVolume iv(volume);
  auto points = Detect(iv, config.ladder, config.threshold);
  if (points.size() > config.max_points) points.resize(config.max_points);
  for (const auto& p : points) {
    auto d = Describe(volume, p);
    set.Append(std::span<const float>(d));
  }
  return set;
}

FrameVolume ReadVolume(const std::filesystem::path& path) {
  auto bytes = io::ReadFile(path);
  io::ByteReader r(bytes, path.string());
  r.ExpectMagic("FVL1");
  const auto t = r.U32(), h = r.U32(), w = r.U32();
  const auto milli_hz = r.U32();
  const std::uint64_t n = static_cast<std::uint64_t>(t) * h * w;
  if (n != r.remaining()) throw FormatError(path.string() + ": voxel count mismatch");
  if (milli_hz == 0) throw FormatError(path.string() + ": zero frame rate");
  FrameVolume v;
  try {
    v = FrameVolume(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w), milli_hz / 1000.0);
  } catch (const PreconditionError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  auto raw = r.Raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    v.data()[i] = static_cast<std::uint8_t>(raw[i]) / 255.0f;
  }
  return v;
}

void WriteVolume(const std::filesystem::path& path, const FrameVolume& v) {
  io::ByteWriter w;
  w.Magic("FVL1");
  w.U32(static_cast<std::uint32_t>(v.frames()));
  w.U32(static_cast<std::uint32_t>(v.height()));
  w.U32(static_cast<std::uint32_t>(v.width()));
  w.U32(static_cast<std::uint32_t>(std::lround(v.frame_rate() * 1000.0)));
  std::vector<std::uint8_t> bytes(v.data().size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v.data()[i], 0.0f, 1.0f) * 255.0f));
  }
  w.Bytes(bytes);
  io::WriteFileAtomic(path, w.data());
}

}  // namespace mmsent::video
