// include/lyralign/loss.hpp

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
#include <limits>
#include <string>
#include <vector>

#include "lyralign/alignment.hpp"
#include "lyralign/codec.hpp"
#include "lyralign/common.hpp"

namespace lyralign {

/// Pre-softmax scores, frames x classes.
using LogitSequence = Matrix;

/// One class per frame: a syllable or silence, never the CTC blank.
struct FramewiseTargets {
  std::vector<SyllableId> labels;
  bool operator==(const FramewiseTargets &) const = default;
};

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits
};

namespace detail {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

inline Matrix LogSoftmax(const Matrix &logits) {
  Matrix out(logits.rows, logits.cols);
  for (std::size_t t = 0; t < logits.rows; ++t) {
    const double *row = logits.row(t);
    double mx = *std::max_element(row, row + logits.cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) sum += std::exp(row[c] - mx);
    double lse = mx + std::log(sum);
    for (std::size_t c = 0; c < logits.cols; ++c) out(t, c) = row[c] - lse;
  }
  return out;
}

inline void CheckFinite(const Matrix &m, const char *what) {
  for (double v : m.data)
    if (!std::isfinite(v))
      Fail(ErrorKind::kValidation, std::string(what) + " has non-finite entries");
}

}  // namespace detail

inline Matrix Softmax(const Matrix &logits) {
  Matrix out = detail::LogSoftmax(logits);
  for (double &v : out.data) v = std::exp(v);
  return out;
}

/// Midpoint rule: frame t is labeled with segment i's syllable iff
/// (t + 0.5) * hop falls in [onset_i, offset_i); silence otherwise.
inline FramewiseTargets FramewiseTargetsFromAlignment(const AlignmentResult &ref,
                                                      std::size_t frames,
                                                      double frame_hop,
                                                      const Lexicon &lex) {
  if (!(frame_hop > 0.0))
    Fail(ErrorKind::kValidation, "frame_hop must be positive");
  const double end = static_cast<double>(frames) * frame_hop;
  std::vector<const Segment *> segs;
  for (const auto &s : ref.segments) segs.push_back(&s);
  std::stable_sort(segs.begin(), segs.end(),
                   [](auto *a, auto *b) { return a->onset < b->onset; });
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i]->onset < 0.0 || segs[i]->offset > end + 1e-9)
      Fail(ErrorKind::kValidation, "reference segment " + std::to_string(i) +
                                       " lies outside [0, " +
                                       std::to_string(end) + "]");
    if (i > 0 && segs[i]->onset < segs[i - 1]->offset)
      Fail(ErrorKind::kValidation, "overlapping reference segments at " +
                                       std::to_string(segs[i]->onset) + " s");
  }
  FramewiseTargets out;
  out.labels.assign(frames, lex.silence_id());
  for (const Segment *s : segs) {
    SyllableId id;
    if (!s->syllable.empty()) {
      auto found = lex.IdOfSyllable(s->syllable);
      if (!found)
        Fail(ErrorKind::kValidation, "unknown syllable '" + s->syllable + "'");
      id = *found;
    } else {
      id = lex.IdOf(s->character);
    }
    // One frame before the first midpoint >= onset, to absorb rounding.
    auto first = static_cast<std::size_t>(
        std::max(0.0, std::ceil(s->onset / frame_hop - 0.5) - 1.0));
    for (std::size_t t = first; t < frames; ++t) {
      double mid = (static_cast<double>(t) + 0.5) * frame_hop;
      if (mid < s->onset) continue;
      if (mid >= s->offset) break;
      out.labels[t] = id;
    }
  }
  return out;
}

/// Minimum frame count CTC needs for `labels`: one per label plus one blank
/// between each pair of equal neighbours.
inline std::size_t CtcMinFrames(const std::vector<SyllableId> &labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++n;
  return n;
}

/// Negative log-likelihood of `labels` under CTC, with its gradient with
/// respect to the logits. Forward and backward recursions run in log space.
inline LossResult CtcLoss(const LogitSequence &logits,
                          const std::vector<SyllableId> &labels,
                          SyllableId blank) {
  using detail::kLogZero;
  using detail::LogAdd;
  const std::size_t T = logits.rows, C = logits.cols;
  if (T == 0) Fail(ErrorKind::kValidation, "CTC: empty logit sequence");
  if (blank >= C) Fail(ErrorKind::kValidation, "CTC: blank id out of range");
  detail::CheckFinite(logits, "CTC logits");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == blank)
      Fail(ErrorKind::kValidation, "CTC: label " + std::to_string(i) + " is blank");
    if (labels[i] >= C)
      Fail(ErrorKind::kValidation, "CTC: label " + std::to_string(i) + " out of range");
  }
  if (T < CtcMinFrames(labels))
    Fail(ErrorKind::kInfeasible,
         "CTC: " + std::to_string(T) + " frames cannot emit " +
             std::to_string(labels.size()) + " labels (needs " +
             std::to_string(CtcMinFrames(labels)) + ")");

  // Blank-augmented sequence: blank l1 blank l2 ... lL blank.
  const std::size_t S = 2 * labels.size() + 1;
  std::vector<SyllableId> ext(S, blank);
  for (std::size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  auto can_skip = [&](std::size_t s) {  // s-2 -> s allowed
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  const Matrix logy = detail::LogSoftmax(logits);
  Matrix alpha(T, S, kLogZero), beta(T, S, kLogZero);
  alpha(0, 0) = logy(0, ext[0]);
  if (S > 1) alpha(0, 1) = logy(0, ext[1]);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = LogAdd(a, alpha(t - 1, s - 1));
      if (can_skip(s)) a = LogAdd(a, alpha(t - 1, s - 2));
      if (a != kLogZero) alpha(t, s) = a + logy(t, ext[s]);
    }
  }
  beta(T - 1, S - 1) = logy(T - 1, ext[S - 1]);
  if (S > 1) beta(T - 1, S - 2) = logy(T - 1, ext[S - 2]);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < S) b = LogAdd(b, beta(t + 1, s + 1));
      if (s + 2 < S && can_skip(s + 2)) b = LogAdd(b, beta(t + 1, s + 2));
      if (b != kLogZero) beta(t, s) = b + logy(t, ext[s]);
    }
  }

  double log_p = alpha(T - 1, S - 1);
  if (S > 1) log_p = LogAdd(log_p, alpha(T - 1, S - 2));
  if (log_p == kLogZero)
    Fail(ErrorKind::kInfeasible, "CTC: label sequence has zero probability");

  LossResult r{-log_p, Matrix(T, C)};
  std::vector<double> occ(C);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(occ.begin(), occ.end(), kLogZero);
    for (std::size_t s = 0; s < S; ++s) {
      if (alpha(t, s) == kLogZero || beta(t, s) == kLogZero) continue;
      occ[ext[s]] = LogAdd(occ[ext[s]], alpha(t, s) + beta(t, s) - logy(t, ext[s]));
    }
    for (std::size_t k = 0; k < C; ++k) {
      double post = occ[k] == kLogZero ? 0.0 : std::exp(occ[k] - log_p);
      r.grad(t, k) = std::exp(logy(t, k)) - post;
    }
  }
  return r;
}

/// Mean framewise cross-entropy; gradient (softmax - onehot) / T.
inline LossResult FramewiseCrossEntropy(const LogitSequence &logits,
                                        const FramewiseTargets &targets) {
  const std::size_t T = logits.rows, C = logits.cols;
  if (targets.labels.size() != T)
    Fail(ErrorKind::kValidation,
         "cross-entropy: " + std::to_string(targets.labels.size()) +
             " targets for " + std::to_string(T) + " frames");
  if (T == 0) Fail(ErrorKind::kValidation, "cross-entropy: empty sequence");
  detail::CheckFinite(logits, "cross-entropy logits");
  const Matrix logy = detail::LogSoftmax(logits);
  LossResult r{0.0, Matrix(T, C)};
  const double inv_t = 1.0 / static_cast<double>(T);
  for (std::size_t t = 0; t < T; ++t) {
    SyllableId k = targets.labels[t];
    if (k >= C)
      Fail(ErrorKind::kValidation, "cross-entropy: target at frame " +
                                       std::to_string(t) + " out of range");
    r.loss -= logy(t, k);
    for (std::size_t c = 0; c < C; ++c)
      r.grad(t, c) = (std::exp(logy(t, c)) - (c == k ? 1.0 : 0.0)) * inv_t;
  }
  r.loss *= inv_t;
  return r;
}

/// CTC plus framewise cross-entropy, unweighted, over one shared logit matrix.
inline LossResult CombinedAlignmentLoss(const LogitSequence &logits,
                                        const std::vector<SyllableId> &labels,
                                        const FramewiseTargets &targets,
                                        SyllableId blank) {
  for (std::size_t t = 0; t < targets.labels.size(); ++t)
    if (targets.labels[t] == blank)
      Fail(ErrorKind::kValidation,
           "framewise target at frame " + std::to_string(t) + " is blank");
  LossResult ctc = CtcLoss(logits, labels, blank);
  LossResult ce = FramewiseCrossEntropy(logits, targets);
  for (std::size_t i = 0; i < ctc.grad.data.size(); ++i)
    ctc.grad.data[i] += ce.grad.data[i];
  ctc.loss += ce.loss;
  return ctc;
}

}  // namespace lyralign
