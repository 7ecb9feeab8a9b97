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

// Segment records, manifest ingestion and label binarization.
//
// Manifest files hold one JSON object per line:
//
//   {"id":"s001","audio":"a/s001.pcm","video":"v/s001.fvl","sentiment":1.4,"split":"train"}
//
// `sentiment` may be omitted for unlabeled segments; `rate` (Hz) gives the
// sample rate of headerless PCM. Blank lines and lines starting with '#' are
// skipped. Media paths are kept verbatim and resolved against the manifest's
// directory on use.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmsent {

enum class Split : std::uint8_t { kTrain, kValidation, kTest };

std::string_view SplitName(Split split);
/// Throws FormatError for anything but "train", "validation", "test".
Split ParseSplit(std::string_view token);

enum class Label : std::int8_t { kNegative = -1, kPositive = 1 };

inline int Sign(Label label) { return static_cast<int>(label); }

/// Positive iff sentiment > 0; a sentiment of exactly 0 is negative.
inline Label Binarize(double sentiment) {
  return sentiment > 0.0 ? Label::kPositive : Label::kNegative;
}

struct SegmentRecord {
  std::string id;
  std::string audio;
  std::string video;
  std::optional<double> sentiment;
  Split split = Split::kTrain;
  std::optional<std::uint32_t> sample_rate;

  bool labeled() const { return sentiment.has_value(); }
  /// Requires labeled().
  Label label() const;

  bool operator==(const SegmentRecord&) const = default;
};

struct Manifest {
  std::vector<SegmentRecord> segments;
  /// Directory relative media paths are resolved against.
  std::filesystem::path base_dir;

  std::filesystem::path Resolve(std::string_view media_path) const;
  std::size_t size() const { return segments.size(); }
  bool empty() const { return segments.empty(); }
};

/// Parses manifest text. Errors name the 1-based line number.
Manifest ParseManifest(std::string_view text, std::filesystem::path base_dir = {});
Manifest LoadManifest(const std::filesystem::path& path);
std::string SerializeManifest(const Manifest& manifest);

/// Order-preserving subsequence of records in `split`.
Manifest FilterSplit(const Manifest& manifest, Split split);

}  // namespace mmsent
