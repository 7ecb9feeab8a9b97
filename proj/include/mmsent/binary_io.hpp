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

// Little-endian byte (de)serialization shared by every on-disk format.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmsent/error.hpp"

namespace mmsent::io {

class ByteWriter {
 public:
  void Magic(std::string_view four_cc) { buf_.append(four_cc.data(), four_cc.size()); }
  void U8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void U16(std::uint16_t v) { PutLe(v); }
  void U32(std::uint32_t v) { PutLe(v); }
  void U64(std::uint64_t v) { PutLe(v); }
  void F32(float v) { PutLe(std::bit_cast<std::uint32_t>(v)); }
  void F64(double v) { PutLe(std::bit_cast<std::uint64_t>(v)); }
  /// u32 byte length followed by the raw UTF-8 bytes.
  void String(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s.data(), s.size());
  }
  void Bytes(std::span<const std::uint8_t> bytes) {
    buf_.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }

  const std::string& data() const { return buf_; }

 private:
  template <typename T>
  void PutLe(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
  }
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string context)
      : bytes_(bytes), context_(std::move(context)) {}

  void ExpectMagic(std::string_view four_cc) {
    auto got = Take(four_cc.size());
    if (got != four_cc) {
      throw FormatError(context_ + ": bad magic, expected \"" + std::string(four_cc) + "\"");
    }
  }
  std::uint8_t U8() { return static_cast<std::uint8_t>(Take(1)[0]); }
  std::uint16_t U16() { return GetLe<std::uint16_t>(); }
  std::uint32_t U32() { return GetLe<std::uint32_t>(); }
  std::uint64_t U64() { return GetLe<std::uint64_t>(); }
  float F32() { return std::bit_cast<float>(GetLe<std::uint32_t>()); }
  double F64() { return std::bit_cast<double>(GetLe<std::uint64_t>()); }
  std::string String() {
    auto n = U32();
    return std::string(Take(n));
  }
  std::string_view Raw(std::size_t n) { return Take(n); }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& context() const { return context_; }

 private:
  std::string_view Take(std::size_t n) {
    if (n > remaining()) throw FormatError(context_ + ": truncated file");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  template <typename T>
  T GetLe() {
    auto raw = Take(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<std::uint8_t>(raw[i])) << (8 * i);
    }
    return v;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string context_;
};

/// Reads a whole file; throws Error when it cannot be opened.
std::string ReadFile(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename, so readers never observe a
/// partially written artifact.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace mmsent::io
