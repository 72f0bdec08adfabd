// include/lyralign/metrics.hpp

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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyralign/alignment.hpp"
#include "lyralign/codec.hpp"
#include "lyralign/common.hpp"

namespace lyralign {

/// Unit-cost edit distance between two random-access sequences.
template <typename SeqA, typename SeqB>
std::size_t Levenshtein(const SeqA &a, const SeqB &b) {
  const std::size_t n = std::size(a), m = std::size(b);
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

/// Edit count and reference length, kept separate so corpora can pool them.
struct ErrorCounts {
  std::size_t edits = 0;
  std::size_t reference_length = 0;

  double rate() const {
    return static_cast<double>(edits) / static_cast<double>(reference_length);
  }
  ErrorCounts &operator+=(const ErrorCounts &o) {
    edits += o.edits;
    reference_length += o.reference_length;
    return *this;
  }
};

inline ErrorCounts CharacterErrors(const LyricsSequence &pred,
                                   const LyricsSequence &ref) {
  if (ref.empty())
    Fail(ErrorKind::kValidation, "error rate undefined for an empty reference");
  return {Levenshtein(pred.chars, ref.chars), ref.size()};
}

inline std::vector<std::string> ToSyllableStrings(const LyricsSequence &seq,
                                                  const Lexicon &lex) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!lex.Contains(seq.chars[i]))
      Fail(ErrorKind::kValidation, "unmapped character '" + seq.chars[i] +
                                       "' at position " + std::to_string(i));
    out.push_back(lex.SyllableOf(seq.chars[i]));
  }
  return out;
}

inline ErrorCounts PhonemeErrors(const LyricsSequence &pred,
                                 const LyricsSequence &ref, const Lexicon &lex) {
  if (ref.empty())
    Fail(ErrorKind::kValidation, "error rate undefined for an empty reference");
  return {Levenshtein(ToSyllableStrings(pred, lex), ToSyllableStrings(ref, lex)),
          ref.size()};
}

/// Character error rate: edit distance over reference length.
inline double Cer(const LyricsSequence &pred, const LyricsSequence &ref) {
  return CharacterErrors(pred, ref).rate();
}

/// CER over the lexicon's syllable strings.
inline double Per(const LyricsSequence &pred, const LyricsSequence &ref,
                  const Lexicon &lex) {
  return PhonemeErrors(pred, ref, lex).rate();
}

/// Mean absolute error over all 2m onset and offset values, in seconds.
/// Both sides must carry the same character sequence.
inline double Mae(const AlignmentResult &pred, const AlignmentResult &ref) {
  if (pred.segments.size() != ref.segments.size())
    Fail(ErrorKind::kValidation,
         "MAE needs matching character counts (pred " +
             std::to_string(pred.segments.size()) + ", ref " +
             std::to_string(ref.segments.size()) + ")");
  if (ref.segments.empty())
    Fail(ErrorKind::kValidation, "MAE undefined for an empty alignment");
  double sum = 0.0;
  for (std::size_t i = 0; i < ref.segments.size(); ++i) {
    const auto &p = pred.segments[i];
    const auto &r = ref.segments[i];
    if (p.character != r.character)
      Fail(ErrorKind::kValidation, "MAE character mismatch at position " +
                                       std::to_string(i) + ": '" + p.character +
                                       "' vs '" + r.character + "'");
    sum += std::abs(p.onset - r.onset) + std::abs(p.offset - r.offset);
  }
  return sum / static_cast<double>(2 * ref.segments.size());
}

enum class PcasMode { kExact, kPronoun };

namespace detail {

// Segment indices sorted by onset; throws on overlap.
inline std::vector<const Segment *> SortedNonOverlapping(const AlignmentResult &r,
                                                         const char *side) {
  std::vector<const Segment *> segs;
  for (const auto &s : r.segments) segs.push_back(&s);
  std::stable_sort(segs.begin(), segs.end(),
                   [](auto *a, auto *b) { return a->onset < b->onset; });
  for (std::size_t i = 1; i < segs.size(); ++i)
    if (segs[i]->onset < segs[i - 1]->offset)
      Fail(ErrorKind::kValidation, std::string("overlapping segments in ") + side +
                                       " at " + std::to_string(segs[i]->onset) + " s");
  return segs;
}

// The segment covering time t, or nullptr for silence.
inline const Segment *LabelAt(const std::vector<const Segment *> &segs, double t) {
  auto it = std::upper_bound(segs.begin(), segs.end(), t,
                             [](double v, const Segment *s) { return v < s->onset; });
  if (it == segs.begin()) return nullptr;
  const Segment *s = *std::prev(it);
  return t < s->offset ? s : nullptr;
}

}  // namespace detail

/// Fraction of [0, total_duration) on which both sides carry the same label
/// (a character, or silence where no segment lies), by exact interval
/// intersection. kPronoun compares characters by syllable.
inline double Pcas(const AlignmentResult &pred, const AlignmentResult &ref,
                   double total_duration, PcasMode mode, const Lexicon *lex = nullptr) {
  if (!(total_duration > 0.0))
    Fail(ErrorKind::kValidation, "PCAS needs a positive total duration");
  if (total_duration < pred.MaxOffset() || total_duration < ref.MaxOffset())
    Fail(ErrorKind::kValidation, "PCAS total duration shorter than an alignment");
  if (mode == PcasMode::kPronoun && lex == nullptr)
    Fail(ErrorKind::kValidation, "PCAS pronoun mode needs a lexicon");
  auto ps = detail::SortedNonOverlapping(pred, "prediction");
  auto rs = detail::SortedNonOverlapping(ref, "reference");

  std::vector<double> cuts{0.0, total_duration};
  for (const auto *segs : {&ps, &rs})
    for (const Segment *s : *segs) {
      cuts.push_back(s->onset);
      cuts.push_back(s->offset);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double matched = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    if (b <= 0.0 || a >= total_duration) continue;
    double mid = 0.5 * (a + b);
    const Segment *p = detail::LabelAt(ps, mid);
    const Segment *r = detail::LabelAt(rs, mid);
    bool same;
    if (!p || !r) same = !p && !r;
    else if (mode == PcasMode::kExact) same = p->character == r->character;
    else same = SyllablesEqual(p->character, r->character, *lex);
    if (same) matched += b - a;
  }
  return matched / total_duration;
}

/// Metric name to value. MAE in seconds; rates as fractions.
using EvalReport = std::map<std::string, double>;

}  // namespace lyralign
