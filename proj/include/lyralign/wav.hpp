// include/lyralign/wav.hpp

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lyralign/common.hpp"

namespace lyralign {

/// Mono audio, samples nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  std::uint32_t sample_rate = 0;

  double duration() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
  bool operator==(const AudioClip &) const = default;
};

inline void ValidateClip(const AudioClip &a, const char *what = "audio clip") {
  if (a.sample_rate == 0)
    Fail(ErrorKind::kValidation, std::string(what) + ": sample rate must be positive");
  for (double v : a.samples)
    if (!std::isfinite(v))
      Fail(ErrorKind::kValidation, std::string(what) + ": non-finite sample");
}

/// 16-bit PCM mono WAV. Samples map to int16 by x * 32768, rounded and
/// saturated, so decoding then encoding is lossless.
inline std::string EncodeWav(const AudioClip &a) {
  ValidateClip(a);
  const auto data_bytes = static_cast<std::uint32_t>(a.samples.size() * 2);
  detail::ByteWriter w;
  w.PutBytes("RIFF");
  w.Put<std::uint32_t>(36 + data_bytes);
  w.PutBytes("WAVE");
  w.PutBytes("fmt ");
  w.Put<std::uint32_t>(16);
  w.Put<std::uint16_t>(1);  // PCM
  w.Put<std::uint16_t>(1);  // mono
  w.Put<std::uint32_t>(a.sample_rate);
  w.Put<std::uint32_t>(a.sample_rate * 2);
  w.Put<std::uint16_t>(2);
  w.Put<std::uint16_t>(16);
  w.PutBytes("data");
  w.Put<std::uint32_t>(data_bytes);
  for (double v : a.samples) {
    double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
    w.Put<std::int16_t>(static_cast<std::int16_t>(q));
  }
  return w.str();
}

inline AudioClip DecodeWav(std::string_view bytes) {
  detail::ByteReader r(bytes, "WAV");
  if (r.GetBytes(4) != "RIFF") Fail(ErrorKind::kFormat, "WAV: missing RIFF header");
  r.Get<std::uint32_t>();
  if (r.GetBytes(4) != "WAVE") Fail(ErrorKind::kFormat, "WAV: missing WAVE tag");
  bool have_fmt = false;
  AudioClip clip;
  while (r.remaining() >= 8) {
    std::string_view id = r.GetBytes(4);
    std::uint32_t size = r.Get<std::uint32_t>();
    if (id == "fmt ") {
      if (size < 16) Fail(ErrorKind::kFormat, "WAV: short fmt chunk");
      auto format = r.Get<std::uint16_t>();
      auto channels = r.Get<std::uint16_t>();
      clip.sample_rate = r.Get<std::uint32_t>();
      r.Get<std::uint32_t>();
      r.Get<std::uint16_t>();
      auto bits = r.Get<std::uint16_t>();
      r.GetBytes(size - 16 + (size & 1));
      if (format != 1 || bits != 16)
        Fail(ErrorKind::kFormat, "WAV: only 16-bit PCM is supported");
      if (channels != 1) Fail(ErrorKind::kFormat, "WAV: only mono is supported");
      if (clip.sample_rate == 0) Fail(ErrorKind::kFormat, "WAV: zero sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) Fail(ErrorKind::kFormat, "WAV: data chunk before fmt chunk");
      if (size % 2 != 0) Fail(ErrorKind::kFormat, "WAV: odd data chunk size");
      clip.samples.resize(size / 2);
      for (auto &s : clip.samples) s = r.Get<std::int16_t>() / 32768.0;
      return clip;
    } else {
      r.GetBytes(size + (size & 1));
    }
  }
  Fail(ErrorKind::kFormat, "WAV: no data chunk");
}

inline AudioClip ReadWav(const std::filesystem::path &path) {
  std::string bytes = ReadTextFile(path);
  try {
    return DecodeWav(bytes);
  } catch (const Error &e) {
    Fail(e.kind(), path.string() + ": " + e.what());
  }
}

inline void WriteWav(const AudioClip &a, const std::filesystem::path &path) {
  WriteFileAtomic(path, EncodeWav(a));
}

}  // namespace lyralign
