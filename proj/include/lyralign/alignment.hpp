// include/lyralign/alignment.hpp

// Copyright 2026  lyralign authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lyralign/codec.hpp"
#include "lyralign/common.hpp"

namespace lyralign {

/// One aligned character. Times are seconds; offset is the exclusive end.
struct Segment {
  std::string character;
  std::string syllable;
  double onset = 0.0;
  double offset = 0.0;

  bool operator==(const Segment &) const = default;
};

/// Per-character boundaries for one recording.
struct AlignmentResult {
  double frame_hop = 0.0;
  std::vector<Segment> segments;
  // Audio duration in seconds, when known (posteriogram length).
  std::optional<double> duration;
  // "predicted" for timed transcriptions; empty otherwise.
  std::string source;

  LyricsSequence Characters() const {
    LyricsSequence seq;
    for (const auto &s : segments) seq.chars.push_back(s.character);
    return seq;
  }
  double MaxOffset() const {
    double m = 0.0;
    for (const auto &s : segments) m = std::max(m, s.offset);
    return m;
  }
};

/// Checks onset < offset, non-negative times and non-decreasing onsets and
/// offsets. `where` prefixes error messages.
inline void ValidateAlignment(const AlignmentResult &r,
                              const std::string &where = "") {
  for (std::size_t i = 0; i < r.segments.size(); ++i) {
    const auto &s = r.segments[i];
    std::string at = where + "/segments/" + std::to_string(i);
    if (!std::isfinite(s.onset) || !std::isfinite(s.offset) || s.onset < 0.0)
      Fail(ErrorKind::kValidation, at + ": times must be finite and >= 0");
    if (!(s.onset < s.offset))
      Fail(ErrorKind::kValidation, at + "/offset: offset must exceed onset");
    if (i > 0) {
      const auto &p = r.segments[i - 1];
      if (s.onset < p.onset || s.offset < p.offset)
        Fail(ErrorKind::kValidation,
             at + ": segments must be ordered by onset and offset");
    }
  }
}

namespace detail {

inline std::string FixedSeconds(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string ExactDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Serializes with fixed 6-decimal onsets/offsets, one segment per line.
inline std::string AlignmentToJson(const AlignmentResult &r) {
  using nlohmann::json;
  std::string out = "{\n  \"frame_hop\": " + detail::ExactDouble(r.frame_hop);
  if (r.duration) out += ",\n  \"duration\": " + detail::FixedSeconds(*r.duration);
  if (!r.source.empty()) out += ",\n  \"source\": " + json(r.source).dump();
  out += ",\n  \"segments\": [";
  for (std::size_t i = 0; i < r.segments.size(); ++i) {
    const auto &s = r.segments[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"char\": " + json(s.character).dump() +
           ", \"syllable\": " + json(s.syllable).dump() +
           ", \"onset\": " + detail::FixedSeconds(s.onset) +
           ", \"offset\": " + detail::FixedSeconds(s.offset) + "}";
  }
  out += r.segments.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline AlignmentResult JsonToAlignment(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    Fail(ErrorKind::kFormat, std::string("alignment JSON: ") + e.what());
  }
  auto number_at = [](const json &obj, const char *key,
                      const std::string &path) -> double {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number())
      Fail(ErrorKind::kFormat,
           "alignment JSON " + path + "/" + key + ": expected a number");
    return it->get<double>();
  };
  auto string_at = [](const json &obj, const char *key,
                      const std::string &path) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
      Fail(ErrorKind::kFormat,
           "alignment JSON " + path + "/" + key + ": expected a string");
    return it->get<std::string>();
  };
  if (!doc.is_object())
    Fail(ErrorKind::kFormat, "alignment JSON /: expected an object");
  AlignmentResult r;
  r.frame_hop = number_at(doc, "frame_hop", "");
  if (!(r.frame_hop > 0.0))
    Fail(ErrorKind::kFormat, "alignment JSON /frame_hop: must be positive");
  if (doc.contains("duration")) r.duration = number_at(doc, "duration", "");
  if (doc.contains("source")) r.source = string_at(doc, "source", "");
  auto segs = doc.find("segments");
  if (segs == doc.end() || !segs->is_array())
    Fail(ErrorKind::kFormat, "alignment JSON /segments: expected an array");
  for (std::size_t i = 0; i < segs->size(); ++i) {
    const json &s = (*segs)[i];
    std::string path = "/segments/" + std::to_string(i);
    if (!s.is_object())
      Fail(ErrorKind::kFormat, "alignment JSON " + path + ": expected an object");
    Segment seg;
    seg.character = string_at(s, "char", path);
    seg.syllable = s.contains("syllable") ? string_at(s, "syllable", path) : "";
    seg.onset = number_at(s, "onset", path);
    seg.offset = number_at(s, "offset", path);
    r.segments.push_back(std::move(seg));
  }
  try {
    ValidateAlignment(r);
  } catch (const Error &e) {
    Fail(ErrorKind::kFormat, std::string("alignment JSON ") + e.what());
  }
  return r;
}

inline void WriteAlignment(const AlignmentResult &r,
                           const std::filesystem::path &path) {
  WriteFileAtomic(path, AlignmentToJson(r));
}

inline AlignmentResult ReadAlignment(const std::filesystem::path &path) {
  std::string text = ReadTextFile(path);
  try {
    return JsonToAlignment(text);
  } catch (const Error &e) {
    Fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace lyralign
