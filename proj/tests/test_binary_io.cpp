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

#include <doctest.h>

#include "mmsent/binary_io.hpp"
#include "mmsent/error.hpp"
#include "test_util.hpp"

using namespace mmsent;

TEST_CASE("little-endian round trip of every field type") {
  io::ByteWriter w;
  w.Magic("TST1");
  w.U8(0xab);
  w.U16(0x1234);
  w.U32(0xdeadbeef);
  w.U64(0x0102030405060708ULL);
  w.F32(-1.5f);
  w.F64(3.141592653589793);
  w.String("segment-7");
  const std::string& bytes = w.data();
  CHECK(bytes.substr(0, 4) == "TST1");
  // U16 0x1234 is stored low byte first.
  CHECK(static_cast<unsigned char>(bytes[5]) == 0x34);
  CHECK(static_cast<unsigned char>(bytes[6]) == 0x12);

  io::ByteReader r(bytes, "test");
  r.ExpectMagic("TST1");
  CHECK(r.U8() == 0xab);
  CHECK(r.U16() == 0x1234);
  CHECK(r.U32() == 0xdeadbeef);
  CHECK(r.U64() == 0x0102030405060708ULL);
  CHECK(r.F32() == -1.5f);
  CHECK(r.F64() == 3.141592653589793);
  CHECK(r.String() == "segment-7");
  CHECK(r.remaining() == 0);
}

TEST_CASE("reader rejects wrong magic and truncation") {
  io::ByteWriter w;
  w.Magic("AAAA");
  w.U32(7);
  io::ByteReader bad_magic(w.data(), "x");
  CHECK_THROWS_AS(bad_magic.ExpectMagic("BBBB"), FormatError);
  io::ByteReader short_read(std::string_view(w.data()).substr(0, 6), "x");
  short_read.ExpectMagic("AAAA");
  CHECK_THROWS_AS(short_read.U32(), FormatError);
}

TEST_CASE("atomic write creates parent directories and replaces content") {
  testing::TempDir dir("io");
  const auto path = dir / "a/b/file.bin";
  io::WriteFileAtomic(path, "first");
  CHECK(io::ReadFile(path) == "first");
  io::WriteFileAtomic(path, "second");
  CHECK(io::ReadFile(path) == "second");
  CHECK_THROWS_AS(io::ReadFile(dir / "missing"), Error);
}
