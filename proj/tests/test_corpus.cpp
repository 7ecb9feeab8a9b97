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

#include <cmath>
#include <string>

#include "mmsent/binary_io.hpp"
#include "mmsent/corpus.hpp"
#include "mmsent/descriptors.hpp"
#include "mmsent/error.hpp"
#include "test_util.hpp"

using namespace mmsent;

namespace {

bool ThrowsWith(const std::string& text, const std::string& needle) {
  try {
    ParseManifest(text);
  } catch (const FormatError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("binarization puts zero on the negative side") {
  CHECK(Binarize(0.0) == Label::kNegative);
  CHECK(Binarize(1e-9) == Label::kPositive);
  CHECK(Binarize(-3.0) == Label::kNegative);
  CHECK(Binarize(3.0) == Label::kPositive);
  CHECK(Sign(Label::kPositive) == 1);
  CHECK(Sign(Label::kNegative) == -1);
}

TEST_CASE("manifest parsing") {
  const std::string text =
      "# comment\n"
      "{\"id\":\"a\",\"audio\":\"a.pcm\",\"video\":\"a.fvl\",\"sentiment\":1.5,\"split\":\"train\"}\n"
      "\n"
      "{\"id\":\"b\",\"audio\":\"b.pcm\",\"video\":\"b.fvl\",\"split\":\"test\",\"rate\":8000}\n";
  const Manifest m = ParseManifest(text, "/data");
  REQUIRE(m.size() == 2);
  CHECK(m.segments[0].id == "a");
  CHECK(m.segments[0].labeled());
  CHECK(m.segments[0].label() == Label::kPositive);
  CHECK(m.segments[0].split == Split::kTrain);
  CHECK_FALSE(m.segments[1].labeled());
  CHECK(*m.segments[1].sample_rate == 8000u);
  CHECK(m.Resolve("a.pcm") == std::filesystem::path("/data/a.pcm"));
  CHECK(m.Resolve("/abs/x.pcm") == std::filesystem::path("/abs/x.pcm"));
  CHECK_THROWS_AS(m.segments[1].label(), PreconditionError);

  const Manifest again = ParseManifest(SerializeManifest(m), "/data");
  CHECK(again.segments == m.segments);

  const Manifest train = FilterSplit(m, Split::kTrain);
  REQUIRE(train.size() == 1);
  CHECK(train.segments[0].id == "a");
}

TEST_CASE("manifest errors name the line") {
  const std::string ok = "{\"id\":\"a\",\"audio\":\"a\",\"video\":\"a\",\"split\":\"train\"}\n";
  CHECK(ThrowsWith(ok + ok, "line 2"));
  CHECK(ThrowsWith(ok + "{not json\n", "line 2"));
  CHECK(ThrowsWith("{\"id\":\"a\",\"video\":\"a\",\"split\":\"train\"}", "audio"));
  CHECK(ThrowsWith("{\"id\":\"a\",\"audio\":\"a\",\"video\":\"a\",\"split\":\"dev\"}", "split"));
  CHECK(ThrowsWith(
      "{\"id\":\"a\",\"audio\":\"a\",\"video\":\"a\",\"split\":\"train\",\"sentiment\":3.5}",
      "outside"));
  CHECK(ThrowsWith("{\"id\":\"a\",\"audio\":\"a\",\"video\":\"a\",\"split\":\"train\",\"rate\":0}",
                   "rate"));
}

TEST_CASE("descriptor sets round trip through DSC1") {
  DescriptorSet set("seg-1", 3);
  const double r0[] = {0.25, 0.5, 0.75};
  const float r1[] = {-1.0f, 2.0f, 1e-3f};
  set.Append(std::span<const double>(r0));
  set.Append(std::span<const float>(r1));
  CHECK(set.size() == 2);
  const std::string bytes = EncodeDescriptorSet(set);
  CHECK(bytes.substr(0, 4) == "DSC1");
  CHECK(DecodeDescriptorSet(bytes) == set);

  testing::TempDir dir("dsc");
  WriteDescriptorSet(dir / "x.dsc", set);
  CHECK(ReadDescriptorSet(dir / "x.dsc") == set);

  CHECK_THROWS_AS(DecodeDescriptorSet(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(DecodeDescriptorSet(bytes + "x"), FormatError);
  CHECK_THROWS_AS(DecodeDescriptorSet("XXXX" + bytes.substr(4)), FormatError);
}

TEST_CASE("empty descriptor sets are representable") {
  DescriptorSet empty("nothing", 64);
  CHECK(empty.empty());
  CHECK(DecodeDescriptorSet(EncodeDescriptorSet(empty)) == empty);
}

TEST_CASE("descriptor rows are validated") {
  DescriptorSet set("s", 2);
  const double wrong[] = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(set.Append(std::span<const double>(wrong)), PreconditionError);
  const double nan[] = {1.0, std::nan("")};
  CHECK_THROWS_AS(set.Append(std::span<const double>(nan)), PreconditionError);
  CHECK_THROWS_AS(DescriptorSet("s", 0), PreconditionError);
  CHECK(ParseModality("video") == Modality::kVideo);
  CHECK_THROWS_AS(ParseModality("text"), FormatError);
}
