// include/lyralign/posteriogram.hpp

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
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lyralign/common.hpp"

namespace lyralign {

inline constexpr double kRowSumTolerance = 1e-4;

/// Start time of a frame. The frame ends at FrameToTime(i + 1, hop).
inline double FrameToTime(std::size_t frame_index, double frame_hop) {
  return static_cast<double>(frame_index) * frame_hop;
}

/// Framewise class distribution, T frames by C classes, stored as f32 to
/// match the PSTG file layout.
class Posteriogram {
 public:
  Posteriogram() = default;

  /// Validates and takes ownership of `probs` (row-major, frames x classes).
  Posteriogram(std::size_t frames, std::size_t classes, double frame_hop,
               std::vector<float> probs)
      : frames_(frames), classes_(classes), frame_hop_(frame_hop),
        probs_(std::move(probs)) {
    Validate();
  }

  std::size_t frame_count() const { return frames_; }
  std::size_t class_count() const { return classes_; }
  double frame_hop() const { return frame_hop_; }
  double duration() const { return FrameToTime(frames_, frame_hop_); }

  float operator()(std::size_t t, std::size_t c) const {
    return probs_[t * classes_ + c];
  }
  std::span<const float> row(std::size_t t) const {
    return {probs_.data() + t * classes_, classes_};
  }
  const std::vector<float> &data() const { return probs_; }

  bool operator==(const Posteriogram &) const = default;

 private:
  void Validate() const {
    if (frames_ < 1) Fail(ErrorKind::kValidation, "posteriogram has no frames");
    if (classes_ < 3)
      Fail(ErrorKind::kValidation,
           "posteriogram needs at least 3 classes, got " +
               std::to_string(classes_));
    if (!(frame_hop_ > 0.0) || !std::isfinite(frame_hop_))
      Fail(ErrorKind::kValidation, "frame_hop must be positive and finite");
    if (probs_.size() != frames_ * classes_)
      Fail(ErrorKind::kValidation, "posteriogram size mismatch");
    std::size_t worst_row = 0;
    double worst_dev = 0.0;
    for (std::size_t t = 0; t < frames_; ++t) {
      double sum = 0.0;
      for (std::size_t c = 0; c < classes_; ++c) {
        float v = probs_[t * classes_ + c];
        if (!std::isfinite(v))
          Fail(ErrorKind::kValidation, "non-finite probability at frame " +
                                           std::to_string(t) + ", class " +
                                           std::to_string(c));
        if (v < 0.0f || v > 1.0f)
          Fail(ErrorKind::kValidation, "probability outside [0,1] at frame " +
                                           std::to_string(t) + ", class " +
                                           std::to_string(c));
        sum += v;
      }
      double dev = std::abs(sum - 1.0);
      if (dev > worst_dev) {
        worst_dev = dev;
        worst_row = t;
      }
    }
    if (worst_dev > kRowSumTolerance)
      Fail(ErrorKind::kValidation,
           "row sums deviate from 1; worst row " + std::to_string(worst_row) +
               " off by " + std::to_string(worst_dev));
  }

  std::size_t frames_ = 0;
  std::size_t classes_ = 0;
  double frame_hop_ = 0.0;
  std::vector<float> probs_;
};

// PSTG layout, little-endian:
//   "PSTG" | u16 version=1 | u16 class_count | u32 frame_count | f64 frame_hop
//   | frame_count * class_count f32, frame-major
inline constexpr std::uint16_t kPstgVersion = 1;
inline constexpr std::size_t kPstgHeaderSize = 4 + 2 + 2 + 4 + 8;

inline std::string EncodePosteriogram(const Posteriogram &p) {
  if (p.class_count() > std::numeric_limits<std::uint16_t>::max() ||
      p.frame_count() > std::numeric_limits<std::uint32_t>::max())
    Fail(ErrorKind::kValidation, "posteriogram too large for PSTG");
  detail::ByteWriter w;
  w.PutBytes("PSTG");
  w.Put<std::uint16_t>(kPstgVersion);
  w.Put<std::uint16_t>(static_cast<std::uint16_t>(p.class_count()));
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(p.frame_count()));
  w.Put<double>(p.frame_hop());
  for (float v : p.data()) w.Put<float>(v);
  return w.str();
}

inline Posteriogram DecodePosteriogram(std::string_view bytes) {
  detail::ByteReader r(bytes, "PSTG");
  if (r.GetBytes(4) != "PSTG") Fail(ErrorKind::kFormat, "PSTG: bad magic");
  auto version = r.Get<std::uint16_t>();
  if (version != kPstgVersion)
    Fail(ErrorKind::kFormat,
         "PSTG: unsupported version " + std::to_string(version));
  std::size_t classes = r.Get<std::uint16_t>();
  std::size_t frames = r.Get<std::uint32_t>();
  double hop = r.Get<double>();
  if (r.remaining() != frames * classes * sizeof(float))
    Fail(ErrorKind::kFormat, r.remaining() < frames * classes * sizeof(float)
                                 ? "PSTG: truncated payload"
                                 : "PSTG: trailing bytes after payload");
  std::vector<float> probs(frames * classes);
  for (auto &v : probs) v = r.Get<float>();
  return Posteriogram(frames, classes, hop, std::move(probs));
}

inline void WritePosteriogram(const Posteriogram &p,
                              const std::filesystem::path &path) {
  WriteFileAtomic(path, EncodePosteriogram(p));
}

inline Posteriogram ReadPosteriogram(const std::filesystem::path &path) {
  std::string bytes = ReadTextFile(path);
  try {
    return DecodePosteriogram(bytes);
  } catch (const Error &e) {
    Fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace lyralign
