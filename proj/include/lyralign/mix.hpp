// include/lyralign/mix.hpp

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
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lyralign/common.hpp"
#include "lyralign/wav.hpp"

namespace lyralign {

enum class ClipPolicy { kNormalize, kHardClip };

struct MixSpec {
  double snr_db = 0.0;     // vocal power over accompaniment power
  std::uint64_t seed = 0;  // picks the accompaniment offset
  ClipPolicy clip_policy = ClipPolicy::kNormalize;
};

/// Mean of squared samples.
inline double RmsPower(const AudioClip &a) {
  if (a.samples.empty()) Fail(ErrorKind::kValidation, "power of an empty clip");
  double sum = 0.0;
  for (double v : a.samples) sum += v * v;
  return sum / static_cast<double>(a.samples.size());
}

/// Signal-to-noise ratio in dB from the two known components.
inline double SnrDb(const AudioClip &signal, const AudioClip &noise) {
  return 10.0 * std::log10(RmsPower(signal) / RmsPower(noise));
}

struct MixResult {
  AudioClip mixture;               // after clip handling
  AudioClip scaled_accompaniment;  // g * cropped accompaniment, pre clip handling
  double gain = 0.0;
  std::size_t offset_samples = 0;
  double output_scale = 1.0;  // applied by kNormalize; 1 otherwise
};

/// `accomp` cropped to the vocal's length starting at `offset`, looping
/// from the start whenever it runs out.
inline AudioClip LoopedSegment(const AudioClip &accomp, std::size_t offset,
                               std::size_t length) {
  if (accomp.samples.empty())
    Fail(ErrorKind::kValidation, "accompaniment is empty");
  AudioClip out{std::vector<double>(length), accomp.sample_rate};
  const std::size_t n = accomp.samples.size();
  for (std::size_t i = 0; i < length; ++i) out.samples[i] = accomp.samples[(offset + i) % n];
  return out;
}

/// vocal + g * accompaniment with g = sqrt(Pv / (Pa * 10^(snr/10))), Pa
/// measured on the segment actually mixed. Output length is the vocal's.
inline MixResult MixAtSnr(const AudioClip &vocal, const AudioClip &accomp,
                          const MixSpec &spec) {
  ValidateClip(vocal, "vocal");
  ValidateClip(accomp, "accompaniment");
  if (!std::isfinite(spec.snr_db)) Fail(ErrorKind::kValidation, "SNR must be finite");
  if (vocal.sample_rate != accomp.sample_rate)
    Fail(ErrorKind::kValidation,
         "sample rate mismatch: vocal " + std::to_string(vocal.sample_rate) +
             " Hz, accompaniment " + std::to_string(accomp.sample_rate) + " Hz");
  if (vocal.samples.empty() || RmsPower(vocal) == 0.0)
    Fail(ErrorKind::kValidation, "vocal is silent; SNR undefined");
  if (accomp.samples.empty() || RmsPower(accomp) == 0.0)
    Fail(ErrorKind::kValidation, "accompaniment is silent; SNR undefined");

  MixResult r;
  std::mt19937_64 rng(spec.seed);
  r.offset_samples = static_cast<std::size_t>(rng() % accomp.samples.size());
  AudioClip seg = LoopedSegment(accomp, r.offset_samples, vocal.samples.size());
  const double pa = RmsPower(seg);
  if (pa == 0.0)
    Fail(ErrorKind::kValidation, "selected accompaniment segment is silent");
  r.gain = std::sqrt(RmsPower(vocal) / (pa * std::pow(10.0, spec.snr_db / 10.0)));

  r.scaled_accompaniment = std::move(seg);
  for (double &v : r.scaled_accompaniment.samples) v *= r.gain;
  r.mixture = vocal;
  double peak = 0.0;
  for (std::size_t i = 0; i < r.mixture.samples.size(); ++i) {
    r.mixture.samples[i] += r.scaled_accompaniment.samples[i];
    peak = std::max(peak, std::abs(r.mixture.samples[i]));
  }
  if (peak > 1.0) {
    if (spec.clip_policy == ClipPolicy::kNormalize) {
      r.output_scale = 1.0 / peak;
      for (double &v : r.mixture.samples) v *= r.output_scale;
    } else {
      for (double &v : r.mixture.samples) v = std::clamp(v, -1.0, 1.0);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Directory-level augmentation

struct ManifestRow {
  std::string vocal;
  std::string accompaniment;
  std::size_t offset_samples = 0;
  double snr_db = 0.0;
  std::string output;  // file name, or "error:<message>" on failure
  bool ok = true;
};

struct Manifest {
  std::vector<ManifestRow> rows;

  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](auto &r) { return !r.ok; }));
  }
};

inline std::string FormatSnr(double snr) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", snr);
  return buf;
}

namespace detail {

inline std::string CsvField(const std::string &s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string ManifestToCsv(const Manifest &m) {
  std::string out = "vocal,accompaniment,offset_samples,snr_db,output\n";
  for (const auto &r : m.rows)
    out += detail::CsvField(r.vocal) + "," + detail::CsvField(r.accompaniment) + "," +
           std::to_string(r.offset_samples) + "," + FormatSnr(r.snr_db) + "," +
           detail::CsvField(r.output) + "\n";
  return out;
}

inline std::vector<std::filesystem::path> ListWavFiles(const std::filesystem::path &dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    Fail(ErrorKind::kIo, "not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto &e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](auto &a, auto &b) { return a.filename().string() < b.filename().string(); });
  if (out.empty()) Fail(ErrorKind::kValidation, "no WAV files in " + dir.string());
  return out;
}

struct AugmentConfig {
  std::vector<double> snrs{0.0, -5.0, -10.0};
  std::uint64_t seed = 0;
  ClipPolicy clip_policy = ClipPolicy::kNormalize;
};

/// Mixes every vocal with a seeded-random accompaniment at every SNR,
/// writing `<vocal stem>_snr<snr>.wav` and `manifest.csv` into `out_dir`.
/// Each (vocal, SNR) draw depends only on the seed and the pair's sorted
/// position. Per-file failures are recorded in the manifest.
inline Manifest AugmentDataset(const std::filesystem::path &vocal_dir,
                               const std::filesystem::path &accomp_dir,
                               const std::filesystem::path &out_dir,
                               const AugmentConfig &cfg) {
  namespace fs = std::filesystem;
  if (cfg.snrs.empty()) Fail(ErrorKind::kValidation, "augment: empty SNR list");
  for (double s : cfg.snrs)
    if (!std::isfinite(s)) Fail(ErrorKind::kValidation, "augment: non-finite SNR");
  const auto vocals = ListWavFiles(vocal_dir);
  const auto accomps = ListWavFiles(accomp_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + out_dir.string());

  // Accompaniments are decoded once; a failure is reported where used.
  std::vector<AudioClip> acc_clips(accomps.size());
  std::vector<std::string> acc_errors(accomps.size());
  for (std::size_t i = 0; i < accomps.size(); ++i) {
    try {
      acc_clips[i] = ReadWav(accomps[i]);
    } catch (const Error &e) {
      acc_errors[i] = e.what();
    }
  }

  std::vector<std::size_t> snr_order(cfg.snrs.size());
  for (std::size_t i = 0; i < snr_order.size(); ++i) snr_order[i] = i;
  std::stable_sort(snr_order.begin(), snr_order.end(),
                   [&](auto a, auto b) { return cfg.snrs[a] < cfg.snrs[b]; });

  Manifest manifest;
  for (std::size_t vi = 0; vi < vocals.size(); ++vi) {
    std::string vocal_error;
    AudioClip vocal;
    try {
      vocal = ReadWav(vocals[vi]);
    } catch (const Error &e) {
      vocal_error = e.what();
    }
    for (std::size_t si : snr_order) {
      const double snr = cfg.snrs[si];
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                        static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(vi), static_cast<std::uint32_t>(si)};
      std::mt19937_64 rng(seq);
      const std::size_t ai = static_cast<std::size_t>(rng() % accomps.size());
      const MixSpec spec{snr, rng(), cfg.clip_policy};

      ManifestRow row;
      row.vocal = vocals[vi].filename().string();
      row.accompaniment = accomps[ai].filename().string();
      row.snr_db = snr;
      try {
        if (!vocal_error.empty()) Fail(ErrorKind::kFormat, vocal_error);
        if (!acc_errors[ai].empty()) Fail(ErrorKind::kFormat, acc_errors[ai]);
        MixResult mixed = MixAtSnr(vocal, acc_clips[ai], spec);
        row.offset_samples = mixed.offset_samples;
        std::string name = vocals[vi].stem().string() + "_snr" + FormatSnr(snr) + ".wav";
        WriteWav(mixed.mixture, out_dir / name);
        row.output = name;
      } catch (const Error &e) {
        row.ok = false;
        row.output = std::string("error:") + e.what();
      }
      manifest.rows.push_back(std::move(row));
    }
  }
  WriteFileAtomic(out_dir / "manifest.csv", ManifestToCsv(manifest));
  return manifest;
}

}  // namespace lyralign
