// include/lyralign/model.hpp

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
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lyralign/alignment.hpp"
#include "lyralign/codec.hpp"
#include "lyralign/common.hpp"
#include "lyralign/loss.hpp"
#include "lyralign/posteriogram.hpp"

namespace lyralign {

/// Acoustic features, frames x dim, f32 as stored in FEAT files.
struct FeatureSequence {
  std::size_t frames = 0;
  std::size_t dim = 0;
  double frame_hop = 0.0;
  std::vector<float> values;

  float operator()(std::size_t t, std::size_t f) const { return values[t * dim + f]; }
  float &operator()(std::size_t t, std::size_t f) { return values[t * dim + f]; }
  bool operator==(const FeatureSequence &) const = default;
};

// FEAT layout, little-endian:
//   "FEAT" | u32 frames | u16 dim | f64 frame_hop | frames * dim f32
inline std::string EncodeFeatures(const FeatureSequence &x) {
  if (x.frames > std::numeric_limits<std::uint32_t>::max() ||
      x.dim > std::numeric_limits<std::uint16_t>::max())
    Fail(ErrorKind::kValidation, "feature sequence too large for FEAT");
  if (x.values.size() != x.frames * x.dim)
    Fail(ErrorKind::kValidation, "feature sequence size mismatch");
  detail::ByteWriter w;
  w.PutBytes("FEAT");
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(x.frames));
  w.Put<std::uint16_t>(static_cast<std::uint16_t>(x.dim));
  w.Put<double>(x.frame_hop);
  for (float v : x.values) w.Put<float>(v);
  return w.str();
}

inline FeatureSequence DecodeFeatures(std::string_view bytes) {
  detail::ByteReader r(bytes, "FEAT");
  if (r.GetBytes(4) != "FEAT") Fail(ErrorKind::kFormat, "FEAT: bad magic");
  FeatureSequence x;
  x.frames = r.Get<std::uint32_t>();
  x.dim = r.Get<std::uint16_t>();
  x.frame_hop = r.Get<double>();
  if (r.remaining() != x.frames * x.dim * sizeof(float))
    Fail(ErrorKind::kFormat, "FEAT: payload size does not match header");
  x.values.resize(x.frames * x.dim);
  for (auto &v : x.values) {
    v = r.Get<float>();
    if (!std::isfinite(v)) Fail(ErrorKind::kFormat, "FEAT: non-finite value");
  }
  return x;
}

inline void WriteFeatures(const FeatureSequence &x, const std::filesystem::path &path) {
  WriteFileAtomic(path, EncodeFeatures(x));
}

inline FeatureSequence ReadFeatures(const std::filesystem::path &path) {
  std::string bytes = ReadTextFile(path);
  try {
    return DecodeFeatures(bytes);
  } catch (const Error &e) {
    Fail(e.kind(), path.string() + ": " + e.what());
  }
}

/// Per-frame MLP over a +/-context window of feature frames:
///   logits = W2 tanh(W1 x + b1) + b2
/// Window frames past either end repeat the edge frame.
class ToyModel {
 public:
  ToyModel() = default;
  ToyModel(std::size_t feature_dim, std::size_t context, std::size_t hidden,
           std::size_t classes)
      : feature_dim_(feature_dim), context_(context), hidden_(hidden),
        classes_(classes),
        w1_(hidden * input_size(), 0.0), b1_(hidden, 0.0),
        w2_(classes * hidden, 0.0), b2_(classes, 0.0) {
    if (feature_dim == 0 || hidden == 0 || classes == 0)
      Fail(ErrorKind::kValidation, "model dimensions must be positive");
  }

  /// Gaussian weights scaled by 1/sqrt(fan_in); zero biases.
  void RandomInit(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n1(0.0, 1.0 / std::sqrt(double(input_size())));
    std::normal_distribution<double> n2(0.0, 1.0 / std::sqrt(double(hidden_)));
    for (auto &w : w1_) w = n1(rng);
    for (auto &w : w2_) w = n2(rng);
    std::fill(b1_.begin(), b1_.end(), 0.0);
    std::fill(b2_.begin(), b2_.end(), 0.0);
  }

  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t context() const { return context_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t class_count() const { return classes_; }
  std::size_t input_size() const { return (2 * context_ + 1) * feature_dim_; }
  std::size_t parameter_count() const {
    return w1_.size() + b1_.size() + w2_.size() + b2_.size();
  }

  /// All parameters as one flat view, in checkpoint order (w1 b1 w2 b2).
  template <typename Fn>
  void ForEachParameter(Fn &&fn) {
    for (auto *v : {&w1_, &b1_, &w2_, &b2_})
      for (double &p : *v) fn(p);
  }
  template <typename Fn>
  void ForEachParameter(Fn &&fn) const {
    for (auto *v : {&w1_, &b1_, &w2_, &b2_})
      for (double p : *v) fn(p);
  }
  std::vector<double> Parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    ForEachParameter([&](double p) { out.push_back(p); });
    return out;
  }
  void SetParameters(std::span<const double> params) {
    if (params.size() != parameter_count())
      Fail(ErrorKind::kValidation, "parameter count mismatch");
    std::size_t i = 0;
    ForEachParameter([&](double &p) { p = params[i++]; });
  }

  const std::vector<double> &w1() const { return w1_; }
  const std::vector<double> &b1() const { return b1_; }
  const std::vector<double> &w2() const { return w2_; }
  const std::vector<double> &b2() const { return b2_; }

  bool operator==(const ToyModel &) const = default;

 private:
  std::size_t feature_dim_ = 0;
  std::size_t context_ = 0;
  std::size_t hidden_ = 0;
  std::size_t classes_ = 0;
  std::vector<double> w1_, b1_, w2_, b2_;  // row-major, out x in
};

/// Activations kept from Forward for Backward.
struct ForwardCache {
  Matrix inputs;  // frames x input_size
  Matrix hidden;  // frames x hidden, post-tanh
};

inline LogitSequence Forward(const ToyModel &m, const FeatureSequence &x,
                             ForwardCache *cache = nullptr) {
  if (x.dim != m.feature_dim())
    Fail(ErrorKind::kValidation, "feature dim " + std::to_string(x.dim) +
                                     " does not match model dim " +
                                     std::to_string(m.feature_dim()));
  if (x.frames == 0) Fail(ErrorKind::kValidation, "empty feature sequence");
  const std::size_t T = x.frames, D = m.input_size(), H = m.hidden(),
                    C = m.class_count(), F = m.feature_dim();
  const auto k = static_cast<std::ptrdiff_t>(m.context());
  Matrix in(T, D), hid(T, H);
  LogitSequence logits(T, C);
  for (std::size_t t = 0; t < T; ++t) {
    double *xi = in.row(t);
    for (std::ptrdiff_t o = -k; o <= k; ++o) {
      auto src = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(t) + o, 0,
                                            static_cast<std::ptrdiff_t>(T) - 1);
      for (std::size_t f = 0; f < F; ++f)
        xi[static_cast<std::size_t>(o + k) * F + f] = x(static_cast<std::size_t>(src), f);
    }
    double *h = hid.row(t);
    for (std::size_t j = 0; j < H; ++j) {
      const double *w = m.w1().data() + j * D;
      double a = m.b1()[j];
      for (std::size_t d = 0; d < D; ++d) a += w[d] * xi[d];
      h[j] = std::tanh(a);
    }
    for (std::size_t c = 0; c < C; ++c) {
      const double *w = m.w2().data() + c * H;
      double a = m.b2()[c];
      for (std::size_t j = 0; j < H; ++j) a += w[j] * h[j];
      logits(t, c) = a;
    }
  }
  if (cache) {
    cache->inputs = std::move(in);
    cache->hidden = std::move(hid);
  }
  return logits;
}

/// Gradient of the loss with respect to every parameter (checkpoint order),
/// given d loss / d logits.
inline std::vector<double> Backward(const ToyModel &m, const ForwardCache &cache,
                                    const Matrix &dlogits) {
  const std::size_t T = dlogits.rows, D = m.input_size(), H = m.hidden(),
                    C = m.class_count();
  std::vector<double> grad(m.parameter_count(), 0.0);
  double *gw1 = grad.data();
  double *gb1 = gw1 + m.w1().size();
  double *gw2 = gb1 + m.b1().size();
  double *gb2 = gw2 + m.w2().size();
  std::vector<double> dh(H);
  for (std::size_t t = 0; t < T; ++t) {
    const double *g = dlogits.row(t);
    const double *h = cache.hidden.row(t);
    const double *xi = cache.inputs.row(t);
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < C; ++c) {
      gb2[c] += g[c];
      const double *w = m.w2().data() + c * H;
      for (std::size_t j = 0; j < H; ++j) {
        gw2[c * H + j] += g[c] * h[j];
        dh[j] += g[c] * w[j];
      }
    }
    for (std::size_t j = 0; j < H; ++j) {
      double da = dh[j] * (1.0 - h[j] * h[j]);
      gb1[j] += da;
      for (std::size_t d = 0; d < D; ++d) gw1[j * D + d] += da * xi[d];
    }
  }
  return grad;
}

/// Softmax of the model output as a posteriogram with the input's hop.
inline Posteriogram PredictPosteriogram(const ToyModel &m, const FeatureSequence &x) {
  Matrix p = Softmax(Forward(m, x));
  std::vector<float> probs(p.data.begin(), p.data.end());
  return Posteriogram(p.rows, p.cols, x.frame_hop, std::move(probs));
}

// TOYM layout, little-endian:
//   "TOYM" | u16 version=1 | u16 feature_dim | u16 context | u16 hidden
//   | u16 classes | f32 parameters (w1 b1 w2 b2, row-major)
inline constexpr std::uint16_t kToymVersion = 1;

inline std::string EncodeModel(const ToyModel &m) {
  constexpr auto kMax = std::numeric_limits<std::uint16_t>::max();
  if (m.feature_dim() > kMax || m.context() > kMax || m.hidden() > kMax ||
      m.class_count() > kMax)
    Fail(ErrorKind::kValidation, "model too large for TOYM");
  detail::ByteWriter w;
  w.PutBytes("TOYM");
  w.Put<std::uint16_t>(kToymVersion);
  for (std::size_t v : {m.feature_dim(), m.context(), m.hidden(), m.class_count()})
    w.Put<std::uint16_t>(static_cast<std::uint16_t>(v));
  m.ForEachParameter([&](double p) {
    float f = static_cast<float>(p);
    if (!std::isfinite(f)) Fail(ErrorKind::kValidation, "non-finite model parameter");
    w.Put<float>(f);
  });
  return w.str();
}

inline ToyModel DecodeModel(std::string_view bytes) {
  detail::ByteReader r(bytes, "TOYM");
  if (r.GetBytes(4) != "TOYM") Fail(ErrorKind::kFormat, "TOYM: bad magic");
  auto version = r.Get<std::uint16_t>();
  if (version != kToymVersion)
    Fail(ErrorKind::kFormat, "TOYM: unsupported version " + std::to_string(version));
  std::size_t f = r.Get<std::uint16_t>(), k = r.Get<std::uint16_t>(),
              h = r.Get<std::uint16_t>(), c = r.Get<std::uint16_t>();
  ToyModel m(f, k, h, c);
  if (r.remaining() != m.parameter_count() * sizeof(float))
    Fail(ErrorKind::kFormat, "TOYM: payload size does not match header");
  m.ForEachParameter([&](double &p) {
    float v = r.Get<float>();
    if (!std::isfinite(v)) Fail(ErrorKind::kFormat, "TOYM: non-finite parameter");
    p = v;
  });
  return m;
}

inline void WriteModel(const ToyModel &m, const std::filesystem::path &path) {
  WriteFileAtomic(path, EncodeModel(m));
}

inline ToyModel ReadModel(const std::filesystem::path &path) {
  std::string bytes = ReadTextFile(path);
  try {
    return DecodeModel(bytes);
  } catch (const Error &e) {
    Fail(e.kind(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Class-conditional Gaussian feature generator. Class c (syllables, then
/// silence) has mean `separation` on feature dimension c and 0 elsewhere.
struct SynthSpec {
  std::size_t syllable_classes = 3;
  std::size_t feature_dim = 8;
  double separation = 2.0;
  double noise_std = 0.5;
  std::size_t min_syllables = 5, max_syllables = 9;  // per sequence
  std::size_t min_segment = 6, max_segment = 14;     // frames per syllable
  std::size_t min_silence = 2, max_silence = 8;      // frames per pause
  double pause_probability = 0.5;                    // between syllables
  double frame_hop = 0.02;
  std::uint64_t seed = 1;
};

struct SynthItem {
  FeatureSequence features;
  std::vector<SyllableId> syllables;
  LyricsSequence lyrics;
  AlignmentResult reference;
  FramewiseTargets frame_labels;
};

// Class i is the CJK character U+4E00+i.
inline std::string SynthCharacter(std::size_t cls) {
  auto cp = static_cast<std::uint32_t>(0x4E00 + cls);
  std::string ch;
  ch += static_cast<char>(0xE0 | (cp >> 12));
  ch += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
  ch += static_cast<char>(0x80 | (cp & 0x3F));
  return ch;
}

/// Lexicon for synthetic data: class i is SynthCharacter(i) with
/// syllable "s<i>".
inline Lexicon SynthLexicon(std::size_t syllable_classes) {
  std::vector<std::pair<std::string, std::string>> entries;
  for (std::size_t i = 0; i < syllable_classes; ++i)
    entries.emplace_back(SynthCharacter(i), "s" + std::to_string(i));
  return Lexicon::FromEntries(entries);
}

inline void ValidateSynthSpec(const SynthSpec &s) {
  if (s.syllable_classes == 0)
    Fail(ErrorKind::kValidation, "synth: need at least one syllable class");
  if (!(s.separation > 0.0) || !std::isfinite(s.separation))
    Fail(ErrorKind::kValidation, "synth: class separation must be positive");
  if (!(s.noise_std >= 0.0) || !std::isfinite(s.noise_std))
    Fail(ErrorKind::kValidation, "synth: noise_std must be >= 0");
  if (s.syllable_classes + 1 > s.feature_dim)
    Fail(ErrorKind::kValidation,
         "synth: feature_dim must exceed the number of syllable classes");
  if (s.min_syllables == 0 || s.min_syllables > s.max_syllables ||
      s.min_segment == 0 || s.min_segment > s.max_segment ||
      s.min_silence == 0 || s.min_silence > s.max_silence)
    Fail(ErrorKind::kValidation, "synth: invalid length ranges");
  if (s.syllable_classes == 1 && s.pause_probability < 1.0)
    Fail(ErrorKind::kValidation,
         "synth: a single class needs pause_probability 1 to keep boundaries");
  if (!(s.frame_hop > 0.0))
    Fail(ErrorKind::kValidation, "synth: frame_hop must be positive");
}

/// `n` items, each deterministic in (spec.seed, item index). Adjacent
/// syllables always differ so every boundary is visible in the features.
inline std::vector<SynthItem> SynthDataset(const SynthSpec &spec, std::size_t n) {
  ValidateSynthSpec(spec);
  if (n == 0) Fail(ErrorKind::kValidation, "synth: n must be >= 1");
  const Lexicon lex = SynthLexicon(spec.syllable_classes);
  const auto silence = static_cast<SyllableId>(spec.syllable_classes);
  std::vector<SynthItem> items(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                      static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    auto uniform = [&](std::size_t lo, std::size_t hi) {
      return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
    };
    auto coin = [&](double p) {
      return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
    };
    std::vector<SyllableId> frame_class;
    auto emit = [&](SyllableId c, std::size_t len) {
      frame_class.insert(frame_class.end(), len, c);
    };

    SynthItem &item = items[i];
    std::size_t m = uniform(spec.min_syllables, spec.max_syllables);
    emit(silence, uniform(spec.min_silence, spec.max_silence));
    for (std::size_t k = 0; k < m; ++k) {
      SyllableId s;
      if (k == 0 || spec.syllable_classes == 1) {
        s = static_cast<SyllableId>(uniform(0, spec.syllable_classes - 1));
      } else {
        // Draw from the classes other than the previous one.
        auto r = static_cast<SyllableId>(uniform(0, spec.syllable_classes - 2));
        s = r >= item.syllables.back() ? r + 1 : r;
      }
      bool pause = k > 0 && (spec.syllable_classes == 1 || coin(spec.pause_probability));
      if (pause) emit(silence, uniform(spec.min_silence, spec.max_silence));
      std::size_t onset = frame_class.size();
      emit(s, uniform(spec.min_segment, spec.max_segment));
      item.syllables.push_back(s);
      item.lyrics.chars.push_back(SynthCharacter(s));
      item.reference.segments.push_back(
          {SynthCharacter(s), lex.syllable_table()[s], FrameToTime(onset, spec.frame_hop),
           FrameToTime(frame_class.size(), spec.frame_hop)});
    }
    emit(silence, uniform(spec.min_silence, spec.max_silence));

    const std::size_t T = frame_class.size();
    item.reference.frame_hop = spec.frame_hop;
    item.reference.duration = FrameToTime(T, spec.frame_hop);
    item.frame_labels.labels = frame_class;
    item.features = {T, spec.feature_dim, spec.frame_hop,
                     std::vector<float>(T * spec.feature_dim)};
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t f = 0; f < spec.feature_dim; ++f) {
        double mean = f == frame_class[t] ? spec.separation : 0.0;
        double v = spec.noise_std == 0.0 ? mean : mean + spec.noise_std * noise(rng);
        item.features(t, f) = static_cast<float>(v);
      }
  }
  return items;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t epochs = 60;
  double learning_rate = 0.2;
  std::size_t batch_size = 32;
  std::uint64_t shuffle_seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean combined loss per epoch
};

/// Combined loss and parameter gradient for one item.
inline double ItemLossAndGradient(const ToyModel &m, const SynthItem &item,
                                  SyllableId blank, std::vector<double> *grad) {
  ForwardCache cache;
  LogitSequence logits = Forward(m, item.features, &cache);
  LossResult r = CombinedAlignmentLoss(logits, item.syllables, item.frame_labels, blank);
  if (grad) *grad = Backward(m, cache, r.grad);
  return r.loss;
}

/// Mini-batch gradient descent on the combined CTC + cross-entropy loss.
/// The blank class is the model's last output.
inline TrainReport Train(ToyModel &m, std::span<const SynthItem> data,
                         const TrainConfig &cfg) {
  if (data.empty()) Fail(ErrorKind::kValidation, "train: no data");
  if (cfg.batch_size == 0) Fail(ErrorKind::kValidation, "train: batch_size must be >= 1");
  if (!std::isfinite(cfg.learning_rate))
    Fail(ErrorKind::kValidation, "train: learning rate must be finite");
  const auto blank = static_cast<SyllableId>(m.class_count() - 1);
  std::mt19937_64 rng(cfg.shuffle_seed);
  std::vector<std::size_t> order(data.size());
  std::vector<double> item_loss(data.size());
  std::vector<double> params = m.Parameters(), grad, acc(params.size());
  TrainReport report;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng() % i]);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        std::size_t idx = order[b];
        double loss = ItemLossAndGradient(m, data[idx], blank, &grad);
        if (!std::isfinite(loss))
          Fail(ErrorKind::kValidation, "train: non-finite loss at epoch " +
                                           std::to_string(epoch) + ", item " +
                                           std::to_string(idx));
        item_loss[idx] = loss;
        for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += grad[p];
      }
      const double scale = cfg.learning_rate / static_cast<double>(stop - start);
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= scale * acc[p];
      m.SetParameters(params);
    }
    double total = 0.0;
    for (double l : item_loss) total += l;
    report.epoch_loss.push_back(total / static_cast<double>(data.size()));
  }
  return report;
}

/// Fraction of frames whose argmax class equals the frame label. With
/// `exclude_blank` the argmax runs over syllables and silence only, the
/// classes a frame label (and the aligner) can use; blank is the last class.
inline double FramewiseAccuracy(const ToyModel &m, std::span<const SynthItem> data,
                                bool exclude_blank = true) {
  std::size_t correct = 0, total = 0;
  for (const auto &item : data) {
    LogitSequence logits = Forward(m, item.features);
    const std::size_t classes = exclude_blank ? logits.cols - 1 : logits.cols;
    for (std::size_t t = 0; t < logits.rows; ++t) {
      const double *row = logits.row(t);
      auto arg = static_cast<SyllableId>(std::max_element(row, row + classes) - row);
      correct += arg == item.frame_labels.labels[t];
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace lyralign
