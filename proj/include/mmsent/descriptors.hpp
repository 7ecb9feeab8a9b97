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

// Low-level descriptor sets: the hand-off between extraction and the codebook.
//
// File layout ("DSC1"), little-endian:
//   char[4] "DSC1" | u32 version (=1) | u32 dim | u64 count |
//   u32 id_len | id bytes (UTF-8) | count*dim f32, row-major

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmsent {

enum class Modality : std::uint8_t { kAudio = 0, kVideo = 1 };

std::string_view ModalityName(Modality m);
/// Throws FormatError for anything but "audio" or "video".
Modality ParseModality(std::string_view token);

class DescriptorSet {
 public:
  DescriptorSet() = default;
  DescriptorSet(std::string segment_id, std::uint32_t dim);
  /// Throws PreconditionError if values.size() is not a multiple of dim or a
  /// value is non-finite.
  DescriptorSet(std::string segment_id, std::uint32_t dim, std::vector<float> values);

  const std::string& segment_id() const { return segment_id_; }
  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const { return values_.empty(); }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const std::vector<float>& values() const { return values_; }

  /// Throws PreconditionError on wrong length or non-finite values.
  void Append(std::span<const float> row);
  void Append(std::span<const double> row);

  bool operator==(const DescriptorSet&) const = default;

 private:
  std::string segment_id_;
  std::uint32_t dim_ = 0;
  std::vector<float> values_;
};

inline constexpr std::uint32_t kDescriptorFormatVersion = 1;

std::string EncodeDescriptorSet(const DescriptorSet& set);
DescriptorSet DecodeDescriptorSet(std::string_view bytes, const std::string& context = "DSC1");

void WriteDescriptorSet(const std::filesystem::path& path, const DescriptorSet& set);
DescriptorSet ReadDescriptorSet(const std::filesystem::path& path);

}  // namespace mmsent
