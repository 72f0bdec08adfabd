// include/lyralign/align.hpp

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
#include <limits>
#include <string>
#include <vector>

#include "lyralign/alignment.hpp"
#include "lyralign/codec.hpp"
#include "lyralign/common.hpp"
#include "lyralign/posteriogram.hpp"

namespace lyralign {

inline constexpr double kProbabilityFloor = 1e-10;

enum class StateKind : std::uint8_t { kSyllable, kOptionalSilence };

struct GraphState {
  StateKind kind;
  SyllableId cls;
  bool operator==(const GraphState &) const = default;
};

/// Left-to-right forced-alignment topology for m syllables:
///   sil_0 s_1 sil_1 s_2 ... s_m sil_m
/// Every state self-loops; silences may be skipped. Syllable k (0-based)
/// sits at state 2k+1.
struct AlignmentGraph {
  std::vector<GraphState> states;
  std::vector<std::string> syllables;   // per character, for output
  std::vector<std::string> characters;  // empty strings when unknown

  std::size_t syllable_count() const { return syllables.size(); }
  std::size_t state_count() const { return states.size(); }
  static constexpr std::size_t StateOfSyllable(std::size_t k) { return 2 * k + 1; }
};

inline AlignmentGraph BuildGraph(const std::vector<SyllableId> &syllables,
                                 const Lexicon &lex) {
  if (syllables.empty())
    Fail(ErrorKind::kValidation, "nothing to align: empty syllable sequence");
  AlignmentGraph g;
  g.states.reserve(2 * syllables.size() + 1);
  g.states.push_back({StateKind::kOptionalSilence, lex.silence_id()});
  for (std::size_t i = 0; i < syllables.size(); ++i) {
    SyllableId s = syllables[i];
    if (s >= lex.syllable_count())
      Fail(ErrorKind::kValidation,
           "syllable " + std::to_string(i) + " has reserved or invalid id " +
               std::to_string(s));
    g.states.push_back({StateKind::kSyllable, s});
    g.states.push_back({StateKind::kOptionalSilence, lex.silence_id()});
    g.syllables.push_back(lex.syllable_table()[s]);
  }
  g.characters.assign(syllables.size(), std::string());
  return g;
}

inline AlignmentGraph BuildGraph(const LyricsSequence &lyrics,
                                 const Lexicon &lex) {
  AlignmentGraph g = BuildGraph(CharsToSyllables(lyrics, lex), lex);
  g.characters = lyrics.chars;
  return g;
}

/// Log-domain emission scores, frames x classes.
struct LogEmissions {
  Matrix scores;
  double frame_hop = 0.0;

  std::size_t frame_count() const { return scores.rows; }
  std::size_t class_count() const { return scores.cols; }
};

/// log(max(p, 1e-10)) for every entry.
inline LogEmissions ToLogEmissions(const Posteriogram &p) {
  LogEmissions e{Matrix(p.frame_count(), p.class_count()), p.frame_hop()};
  for (std::size_t t = 0; t < p.frame_count(); ++t)
    for (std::size_t c = 0; c < p.class_count(); ++c)
      e.scores(t, c) = std::log(std::max<double>(p(t, c), kProbabilityFloor));
  return e;
}

struct AlignOutput {
  AlignmentResult result;
  double path_log_score = 0.0;
  std::vector<std::size_t> path;  // graph state per frame
};

namespace detail {

inline void CheckAlignable(const LogEmissions &e, const AlignmentGraph &g) {
  if (g.syllable_count() == 0)
    Fail(ErrorKind::kValidation, "nothing to align: empty graph");
  if (e.frame_count() < g.syllable_count())
    Fail(ErrorKind::kInfeasible,
         "infeasible alignment: " + std::to_string(g.syllable_count()) +
             " characters but only " + std::to_string(e.frame_count()) +
             " frames");
  for (const auto &s : g.states)
    if (s.cls >= e.class_count())
      Fail(ErrorKind::kValidation,
           "class index " + std::to_string(s.cls) +
               " out of range for posteriogram with " +
               std::to_string(e.class_count()) + " classes");
}

// Rank of predecessor `pred` for state `next` under the tie-break: staying
// beats skipping a silence, which beats stepping by one (lower index wins).
inline int PredecessorRank(std::size_t pred, std::size_t next) {
  if (pred == next) return 0;
  if (pred + 2 == next) return 1;
  return 2;
}

inline bool IsFinalState(std::size_t j, const AlignmentGraph &g) {
  return j + 2 >= g.state_count();
}

inline bool IsInitialState(std::size_t j) { return j <= 1; }

inline bool CanTransition(std::size_t from, std::size_t to,
                          const AlignmentGraph &g) {
  if (to == from || to == from + 1) return to < g.state_count();
  // Skip over an optional silence: from a syllable state to the next one.
  return to == from + 2 && to < g.state_count() &&
         g.states[from + 1].kind == StateKind::kOptionalSilence &&
         g.states[from].kind == StateKind::kSyllable;
}

}  // namespace detail

/// Converts a per-frame state path into character boundaries.
inline AlignmentResult PathToAlignment(const std::vector<std::size_t> &path,
                                       const AlignmentGraph &g,
                                       double frame_hop) {
  AlignmentResult r;
  r.frame_hop = frame_hop;
  r.duration = FrameToTime(path.size(), frame_hop);
  const std::size_t m = g.syllable_count();
  std::vector<std::size_t> first(m, path.size()), last(m, 0);
  for (std::size_t t = 0; t < path.size(); ++t) {
    std::size_t j = path[t];
    if (g.states[j].kind != StateKind::kSyllable) continue;
    std::size_t k = (j - 1) / 2;
    first[k] = std::min(first[k], t);
    last[k] = t;
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (first[k] == path.size())
      Fail(ErrorKind::kValidation, "path never visits syllable " + std::to_string(k));
    r.segments.push_back({g.characters.size() == m ? g.characters[k] : "",
                          g.syllables[k], FrameToTime(first[k], frame_hop),
                          FrameToTime(last[k] + 1, frame_hop)});
  }
  return r;
}

/// Sum of emission scores along `path`, accumulated in frame order.
inline double PathScore(const LogEmissions &e, const AlignmentGraph &g,
                        const std::vector<std::size_t> &path) {
  double score = 0.0;
  for (std::size_t t = 0; t < path.size(); ++t)
    score = t == 0 ? e.scores(t, g.states[path[t]].cls)
                   : score + e.scores(t, g.states[path[t]].cls);
  return score;
}

/// True iff `path` is a complete monotonic path through `g`.
inline bool IsValidPath(const std::vector<std::size_t> &path,
                        const AlignmentGraph &g) {
  if (path.empty() || !detail::IsInitialState(path.front()) ||
      !detail::IsFinalState(path.back(), g))
    return false;
  for (std::size_t t = 1; t < path.size(); ++t)
    if (!detail::CanTransition(path[t - 1], path[t], g)) return false;
  return true;
}

/// Viterbi over precomputed log emissions. Emissions only; no transition
/// scores. Ties prefer staying, then the lower-index predecessor.
inline AlignOutput AlignLogEmissions(const LogEmissions &e,
                                     const AlignmentGraph &g) {
  detail::CheckAlignable(e, g);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const std::size_t T = e.frame_count(), S = g.state_count();
  Matrix delta(T, S, kNegInf);
  std::vector<std::uint32_t> back(T * S, 0);

  for (std::size_t j = 0; j < S && detail::IsInitialState(j); ++j)
    delta(0, j) = e.scores(0, g.states[j].cls);

  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < S; ++j) {
      // Candidates in preference order; strict '>' keeps the earlier one.
      std::size_t cands[3];
      std::size_t n = 0;
      cands[n++] = j;
      if (j >= 2 && detail::CanTransition(j - 2, j, g)) cands[n++] = j - 2;
      if (j >= 1) cands[n++] = j - 1;
      double best = kNegInf;
      std::size_t arg = j;
      for (std::size_t c = 0; c < n; ++c) {
        double v = delta(t - 1, cands[c]);
        if (v > best) {
          best = v;
          arg = cands[c];
        }
      }
      if (best == kNegInf) continue;
      delta(t, j) = best + e.scores(t, g.states[j].cls);
      back[t * S + j] = static_cast<std::uint32_t>(arg);
    }
  }

  // Final state: last syllable preferred over trailing silence on ties.
  std::size_t end = S - 2;
  if (delta(T - 1, S - 1) > delta(T - 1, S - 2)) end = S - 1;
  if (delta(T - 1, end) == kNegInf)
    Fail(ErrorKind::kInfeasible, "infeasible alignment: no complete path");

  AlignOutput out;
  out.path.assign(T, 0);
  out.path[T - 1] = end;
  for (std::size_t t = T - 1; t > 0; --t)
    out.path[t - 1] = back[t * S + out.path[t]];
  out.path_log_score = delta(T - 1, end);
  out.result = PathToAlignment(out.path, g, e.frame_hop);
  return out;
}

inline AlignOutput ViterbiAlign(const Posteriogram &p, const AlignmentGraph &g) {
  return AlignLogEmissions(ToLogEmissions(p), g);
}

inline constexpr std::size_t kBruteForceMaxFrames = 12;
inline constexpr std::size_t kBruteForceMaxStates = 9;

/// Exhaustive search over every monotonic path; a reference for
/// AlignLogEmissions on tiny instances. Same scoring and tie-break.
inline AlignOutput BruteForceAlignLogEmissions(const LogEmissions &e,
                                               const AlignmentGraph &g) {
  if (e.frame_count() > kBruteForceMaxFrames ||
      g.state_count() > kBruteForceMaxStates)
    Fail(ErrorKind::kValidation,
         "brute-force alignment refused: limited to " +
             std::to_string(kBruteForceMaxFrames) + " frames and " +
             std::to_string(kBruteForceMaxStates) + " states");
  detail::CheckAlignable(e, g);
  const std::size_t T = e.frame_count();

  // `a` beats `b` if, scanning back from the last frame, the first
  // differing state is more preferred given the (shared) successor.
  auto preferred = [&](const std::vector<std::size_t> &a,
                       const std::vector<std::size_t> &b) {
    for (std::size_t t = T; t-- > 0;) {
      if (a[t] == b[t]) continue;
      if (t == T - 1) return a[t] < b[t];
      return detail::PredecessorRank(a[t], a[t + 1]) <
             detail::PredecessorRank(b[t], b[t + 1]);
    }
    return false;
  };

  std::vector<std::size_t> path(T), best_path;
  double best = -std::numeric_limits<double>::infinity();
  auto visit = [&](auto &self, std::size_t t, double score) -> void {
    if (t == T) {
      if (!detail::IsFinalState(path[T - 1], g)) return;
      if (best_path.empty() || score > best ||
          (score == best && preferred(path, best_path))) {
        best = score;
        best_path = path;
      }
      return;
    }
    for (std::size_t j = 0; j < g.state_count(); ++j) {
      if (t == 0 ? !detail::IsInitialState(j)
                 : !detail::CanTransition(path[t - 1], j, g))
        continue;
      path[t] = j;
      double emit = e.scores(t, g.states[j].cls);
      self(self, t + 1, t == 0 ? emit : score + emit);
    }
  };
  visit(visit, 0, 0.0);
  if (best_path.empty())
    Fail(ErrorKind::kInfeasible, "infeasible alignment: no complete path");

  AlignOutput out;
  out.path = best_path;
  out.path_log_score = best;
  out.result = PathToAlignment(out.path, g, e.frame_hop);
  return out;
}

inline AlignOutput BruteForceAlign(const Posteriogram &p,
                                   const AlignmentGraph &g) {
  return BruteForceAlignLogEmissions(ToLogEmissions(p), g);
}

/// Lyrics text to boundaries: codec, graph, Viterbi.
inline AlignOutput AlignLyrics(const Posteriogram &p, const LyricsSequence &lyrics,
                               const Lexicon &lex) {
  return ViterbiAlign(p, BuildGraph(lyrics, lex));
}

}  // namespace lyralign
