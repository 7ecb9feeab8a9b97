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

#include "mmsent/descriptors.hpp"

#include <cmath>

#include "mmsent/binary_io.hpp"
#include "mmsent/error.hpp"

namespace mmsent {

std::string_view ModalityName(Modality m) { return m == Modality::kAudio ? "audio" : "video"; }

Modality ParseModality(std::string_view token) {
  if (token == "audio") return Modality::kAudio;
  if (token == "video") return Modality::kVideo;
  throw FormatError("unknown modality \"" + std::string(token) + "\"");
}

DescriptorSet::DescriptorSet(std::string segment_id, std::uint32_t dim)
    : segment_id_(std::move(segment_id)), dim_(dim) {
  if (dim_ == 0) throw PreconditionError("descriptor dim must be positive");
}

DescriptorSet::DescriptorSet(std::string segment_id, std::uint32_t dim, std::vector<float> values)
    : DescriptorSet(std::move(segment_id), dim) {
  if (values.size() % dim_ != 0) {
    throw PreconditionError("descriptor values not a multiple of dim");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw PreconditionError("non-finite descriptor value");
  }
  values_ = std::move(values);
}

void DescriptorSet::Append(std::span<const float> row) {
  if (row.size() != dim_) throw PreconditionError("descriptor row has wrong dimension");
  for (float v : row) {
    if (!std::isfinite(v)) throw PreconditionError("non-finite descriptor value");
  }
  values_.insert(values_.end(), row.begin(), row.end());
}

void DescriptorSet::Append(std::span<const double> row) {
  std::vector<float> tmp(row.begin(), row.end());
  Append(std::span<const float>(tmp));
}

std::string EncodeDescriptorSet(const DescriptorSet& set) {
  io::ByteWriter w;
  w.Magic("DSC1");
  w.U32(kDescriptorFormatVersion);
  w.U32(set.dim());
  w.U64(set.size());
  w.String(set.segment_id());
  for (float v : set.values()) w.F32(v);
  return w.data();
}

DescriptorSet DecodeDescriptorSet(std::string_view bytes, const std::string& context) {
  io::ByteReader r(bytes, context);
  r.ExpectMagic("DSC1");
  auto version = r.U32();
  if (version != kDescriptorFormatVersion) {
    throw FormatError(context + ": unsupported version " + std::to_string(version));
  }
  auto dim = r.U32();
  auto count = r.U64();
  auto id = r.String();
  if (dim == 0) throw FormatError(context + ": zero dim");
  if (count > r.remaining() / 4 / dim) throw FormatError(context + ": truncated file");
  std::vector<float> values(count * dim);
  for (auto& v : values) v = r.F32();
  if (r.remaining() != 0) throw FormatError(context + ": trailing bytes");
  try {
    return DescriptorSet(std::move(id), dim, std::move(values));
  } catch (const PreconditionError& e) {
    throw FormatError(context + ": " + e.what());
  }
}

void WriteDescriptorSet(const std::filesystem::path& path, const DescriptorSet& set) {
  io::WriteFileAtomic(path, EncodeDescriptorSet(set));
}

DescriptorSet ReadDescriptorSet(const std::filesystem::path& path) {
  return DecodeDescriptorSet(io::ReadFile(path), path.string());
}

}  // namespace mmsent
