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

#include "mmsent/corpus.hpp"

#include <cmath>
#include <unordered_set>

#include <json.hpp>

#include "mmsent/binary_io.hpp"
#include "mmsent/error.hpp"

namespace mmsent {

using nlohmann::json;

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view token) {
  if (token == "train") return Split::kTrain;
  if (token == "validation") return Split::kValidation;
  if (token == "test") return Split::kTest;
  throw FormatError("unknown split \"" + std::string(token) + "\"");
}

Label SegmentRecord::label() const {
  if (!sentiment) throw PreconditionError("segment " + id + " has no sentiment label");
  return Binarize(*sentiment);
}

std::filesystem::path Manifest::Resolve(std::string_view media_path) const {
  std::filesystem::path p{std::string(media_path)};
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

namespace {

SegmentRecord ParseRecord(const json& obj) {
  if (!obj.is_object()) throw FormatError("record is not an object");
  SegmentRecord rec;
  auto require_string = [&](const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
      throw FormatError(std::string("missing or non-string field \"") + key + "\"");
    }
    return it->get<std::string>();
  };
  rec.id = require_string("id");
  if (rec.id.empty()) throw FormatError("empty id");
  rec.audio = require_string("audio");
  rec.video = require_string("video");
  rec.split = ParseSplit(require_string("split"));
  if (auto it = obj.find("sentiment"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) throw FormatError("sentiment is not a number");
    double s = it->get<double>();
    if (!std::isfinite(s) || s < -3.0 || s > 3.0) {
      throw FormatError("sentiment " + it->dump() + " outside [-3, 3]");
    }
    rec.sentiment = s;
  }
  if (auto it = obj.find("rate"); it != obj.end()) {
    if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0 ||
        it->get<std::uint64_t>() > 0xFFFFFFFFULL) {
      throw FormatError("rate must be a positive integer");
    }
    rec.sample_rate = it->get<std::uint32_t>();
  }
  return rec;
}

}  // namespace

Manifest ParseManifest(std::string_view text, std::filesystem::path base_dir) {
  Manifest manifest;
  manifest.base_dir = std::move(base_dir);
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    try {
      SegmentRecord rec = ParseRecord(json::parse(line));
      if (!seen.insert(rec.id).second) throw FormatError("duplicate id \"" + rec.id + "\"");
      manifest.segments.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return manifest;
}

Manifest LoadManifest(const std::filesystem::path& path) {
  return ParseManifest(io::ReadFile(path), path.parent_path());
}

std::string SerializeManifest(const Manifest& manifest) {
  std::string out;
  for (const auto& rec : manifest.segments) {
    json obj;
    obj["id"] = rec.id;
    obj["audio"] = rec.audio;
    obj["video"] = rec.video;
    if (rec.sentiment) obj["sentiment"] = *rec.sentiment;
    obj["split"] = std::string(SplitName(rec.split));
    if (rec.sample_rate) obj["rate"] = *rec.sample_rate;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

Manifest FilterSplit(const Manifest& manifest, Split split) {
  Manifest out;
  out.base_dir = manifest.base_dir;
  for (const auto& rec : manifest.segments) {
    if (rec.split == split) out.segments.push_back(rec);
  }
  return out;
}

}  // namespace mmsent
