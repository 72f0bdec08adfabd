// tests/align_test.cpp

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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lyralign/align.hpp"
#include "oracles.hpp"

namespace lyralign {
namespace {

// Lexicon with syllables a, b, c; silence 3, blank 4.
Lexicon Abc() { return Lexicon::Parse("甲\ta\n乙\tb\n丙\tc\n"); }

Posteriogram RandomProbs(std::mt19937_64 &rng, std::size_t T, std::size_t C,
                         double hop = 0.02) {
  std::gamma_distribution<float> g(0.5f, 1.0f);
  std::vector<float> v(T * C);
  for (std::size_t t = 0; t < T; ++t) {
    float sum = 0.0f;
    for (std::size_t c = 0; c < C; ++c) sum += v[t * C + c] = g(rng) + 1e-6f;
    for (std::size_t c = 0; c < C; ++c) v[t * C + c] /= sum;
  }
  return Posteriogram(T, C, hop, std::move(v));
}

Matrix FlooredLog(const Posteriogram &p) {
  Matrix m(p.frame_count(), p.class_count());
  for (std::size_t t = 0; t < m.rows; ++t)
    for (std::size_t c = 0; c < m.cols; ++c)
      m(t, c) = std::log(std::max(static_cast<double>(p(t, c)), 1e-10));
  return m;
}

std::vector<std::uint32_t> StateClasses(const AlignmentGraph &g) {
  std::vector<std::uint32_t> cls;
  for (const auto &s : g.states) cls.push_back(s.cls);
  return cls;
}

TEST(BuildGraphTest, Patterns) {
  Lexicon lex = Abc();
  AlignmentGraph g1 = BuildGraph(std::vector<SyllableId>{0}, lex);
  ASSERT_EQ(g1.state_count(), 3u);
  EXPECT_EQ(g1.states[0].kind, StateKind::kOptionalSilence);
  EXPECT_EQ(g1.states[1].cls, 0u);
  EXPECT_EQ(g1.states[2].cls, lex.silence_id());

  AlignmentGraph g2 = BuildGraph(std::vector<SyllableId>{0, 1}, lex);
  ASSERT_EQ(g2.state_count(), 5u);
  std::vector<SyllableId> want = {3, 0, 3, 1, 3};
  for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(g2.states[j].cls, want[j]);
}

TEST(BuildGraphTest, RejectsEmptyAndReserved) {
  Lexicon lex = Abc();
  EXPECT_THROW(BuildGraph(std::vector<SyllableId>{}, lex), Error);
  EXPECT_THROW(BuildGraph(std::vector<SyllableId>{lex.silence_id()}, lex), Error);
  EXPECT_THROW(BuildGraph(std::vector<SyllableId>{lex.blank_id()}, lex), Error);
}

TEST(ViterbiTest, SilenceThenSyllable) {
  // Classes: a, sil, blank.
  Lexicon lex = Lexicon::Parse("甲\ta\n");
  Posteriogram p(3, 3, 0.02,
                 {0.05f, 0.9f, 0.05f, 0.9f, 0.05f, 0.05f, 0.9f, 0.05f, 0.05f});
  AlignOutput out = AlignLyrics(p, LyricsSequence::FromText("甲"), lex);
  ASSERT_EQ(out.result.segments.size(), 1u);
  EXPECT_NEAR(out.result.segments[0].onset, 0.02, 1e-12);
  EXPECT_NEAR(out.result.segments[0].offset, 0.06, 1e-12);
  EXPECT_EQ(out.result.segments[0].character, "甲");
  EXPECT_EQ(out.result.segments[0].syllable, "a");
  EXPECT_EQ(out.path, (std::vector<std::size_t>{0, 1, 1}));
  EXPECT_NEAR(out.path_log_score, 3.0 * std::log(0.9), 1e-6);
}

TEST(ViterbiTest, OneFramePerSyllableWhenTEqualsM) {
  Lexicon lex = Abc();
  std::mt19937_64 rng(5);
  AlignmentGraph g = BuildGraph(std::vector<SyllableId>{2, 0, 1}, lex);
  for (int trial = 0; trial < 20; ++trial) {
    AlignOutput out = ViterbiAlign(RandomProbs(rng, 3, 5), g);
    EXPECT_EQ(out.path, (std::vector<std::size_t>{1, 3, 5}));
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(out.result.segments[k].onset, 0.02 * k, 1e-12);
      EXPECT_NEAR(out.result.segments[k].offset, 0.02 * (k + 1), 1e-12);
    }
  }
}

TEST(ViterbiTest, InfeasibleWhenTooFewFrames) {
  Lexicon lex = Abc();
  std::mt19937_64 rng(6);
  AlignmentGraph g = BuildGraph(std::vector<SyllableId>{0, 1, 2}, lex);
  try {
    ViterbiAlign(RandomProbs(rng, 2, 5), g);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
  }
}

TEST(ViterbiTest, ClassOutOfRange) {
  Lexicon lex = Abc();
  std::mt19937_64 rng(7);
  AlignmentGraph g = BuildGraph(std::vector<SyllableId>{2}, lex);
  try {
    ViterbiAlign(RandomProbs(rng, 4, 3), g);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
  }
}

TEST(ViterbiTest, RandomSixFramesMatchesEnumeration) {
  Lexicon lex = Lexicon::Parse("甲\ta\n乙\tb\n");  // C = 4
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    AlignmentGraph g = BuildGraph(
        std::vector<SyllableId>{static_cast<SyllableId>(rng() % 2),
                                static_cast<SyllableId>(rng() % 2)},
        lex);
    Posteriogram p = RandomProbs(rng, 6, 4);
    AlignOutput v = ViterbiAlign(p, g);
    EXPECT_NEAR(v.path_log_score, oracle::BestPathScore(FlooredLog(p), StateClasses(g)),
                1e-9);
    EXPECT_TRUE(IsValidPath(v.path, g));
    EXPECT_NEAR(PathScore(ToLogEmissions(p), g, v.path), v.path_log_score, 1e-12);
  }
}

TEST(ViterbiTest, AgreesWithBruteForceIncludingTies) {
  Lexicon lex = Abc();
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + rng() % 3, T = m + rng() % (9 - m);
    std::vector<SyllableId> ids;
    for (std::size_t k = 0; k < m; ++k) ids.push_back(static_cast<SyllableId>(rng() % 3));
    AlignmentGraph g = BuildGraph(ids, lex);
    Posteriogram p = RandomProbs(rng, T, 5);
    if (trial % 2 == 0) {
      // Rows drawn from permutations of one template force exact ties.
      std::vector<float> q;
      for (std::size_t t = 0; t < T; ++t) {
        std::vector<float> row = {0.4f, 0.4f, 0.1f, 0.05f, 0.05f};
        std::shuffle(row.begin(), row.end(), rng);
        q.insert(q.end(), row.begin(), row.end());
      }
      p = Posteriogram(T, 5, 0.02, std::move(q));
    }
    AlignOutput v = ViterbiAlign(p, g), b = BruteForceAlign(p, g);
    EXPECT_NEAR(v.path_log_score, b.path_log_score, 1e-9);
    EXPECT_EQ(v.path, b.path) << "trial " << trial;
    EXPECT_EQ(v.result.segments, b.result.segments);
  }
}

TEST(ViterbiTest, UniformEmissionsFollowTieBreak) {
  // All paths tie. The last frame takes s_m; tracing back, staying wins
  // wherever it is reachable, then skipping the leading silence.
  Lexicon lex = Abc();
  Posteriogram p(4, 5, 0.02, std::vector<float>(20, 0.2f));
  AlignOutput v = ViterbiAlign(p, BuildGraph(std::vector<SyllableId>{0, 1}, lex));
  EXPECT_EQ(v.path, (std::vector<std::size_t>{1, 3, 3, 3}));
}

// No single-frame state change on the returned path improves the score.
TEST(ViterbiProperty, LocallyOptimal) {
  Lexicon lex = Abc();
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng() % 3, T = m + rng() % 20;
    std::vector<SyllableId> ids;
    for (std::size_t k = 0; k < m; ++k) ids.push_back(static_cast<SyllableId>(rng() % 3));
    AlignmentGraph g = BuildGraph(ids, lex);
    Posteriogram p = RandomProbs(rng, T, 5);
    LogEmissions e = ToLogEmissions(p);
    AlignOutput v = ViterbiAlign(p, g);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t j = 0; j < g.state_count(); ++j) {
        auto alt = v.path;
        alt[t] = j;
        if (IsValidPath(alt, g)) {
          EXPECT_LE(PathScore(e, g, alt), v.path_log_score + 1e-12);
        }
      }
  }
}

// Scaling every row by a constant shifts every path by the same amount, so
// the path is unchanged and the score moves by T log c.
TEST(ViterbiProperty, RowScalingShiftsScoreOnly) {
  Lexicon lex = Abc();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t T = 3 + rng() % 30;
    AlignmentGraph g = BuildGraph(std::vector<SyllableId>{0, 2, 1}, lex);
    Posteriogram p = RandomProbs(rng, T, 5);
    LogEmissions e = ToLogEmissions(p);
    LogEmissions shifted = e;
    const double c = -0.7;
    for (double &s : shifted.scores.data) s += c;
    AlignOutput a = AlignLogEmissions(e, g), b = AlignLogEmissions(shifted, g);
    EXPECT_EQ(a.path, b.path);
    EXPECT_NEAR(b.path_log_score - a.path_log_score, c * static_cast<double>(T), 1e-9);
  }
}

TEST(ViterbiProperty, BoundariesOrderedAndInsideAudio) {
  Lexicon lex = Abc();
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng() % 6, T = m + rng() % 40;
    std::vector<SyllableId> ids;
    for (std::size_t k = 0; k < m; ++k) ids.push_back(static_cast<SyllableId>(rng() % 3));
    Posteriogram p = RandomProbs(rng, T, 5);
    AlignOutput v = ViterbiAlign(p, BuildGraph(ids, lex));
    EXPECT_NO_THROW(ValidateAlignment(v.result));
    for (std::size_t k = 0; k < m; ++k) {
      EXPECT_GE(v.result.segments[k].onset, 0.0);
      EXPECT_LE(v.result.segments[k].offset, p.duration() + 1e-12);
      if (k > 0) {
        EXPECT_GE(v.result.segments[k].onset, v.result.segments[k - 1].offset - 1e-12);
      }
    }
  }
}

TEST(BruteForceTest, SingleFrameSingleSyllable) {
  Lexicon lex = Abc();
  std::mt19937_64 rng(13);
  AlignOutput b = BruteForceAlign(RandomProbs(rng, 1, 5),
                                  BuildGraph(std::vector<SyllableId>{1}, lex));
  EXPECT_EQ(b.path, (std::vector<std::size_t>{1}));
}

TEST(BruteForceTest, GuardRefuses) {
  Lexicon lex = Abc();
  std::mt19937_64 rng(14);
  EXPECT_THROW(BruteForceAlign(RandomProbs(rng, 13, 5),
                               BuildGraph(std::vector<SyllableId>{1}, lex)),
               Error);
  EXPECT_THROW(BruteForceAlign(RandomProbs(rng, 6, 5),
                               BuildGraph(std::vector<SyllableId>{0, 1, 2, 0, 1}, lex)),
               Error);
}

TEST(AlignmentJsonTest, RoundTrip) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    AlignmentResult r;
    r.frame_hop = 0.01 * (1 + trial % 3);
    double t = u(rng);
    for (int k = 0; k < 1 + trial % 7; ++k) {
      double on = t, off = t + 0.001 + u(rng);
      r.segments.push_back({"乙", "b", on, off});
      t = off + u(rng) * (trial % 2);
    }
    if (trial % 2) r.duration = t + 1.0;
    if (trial % 5 == 0) r.source = "predicted";
    AlignmentResult back = JsonToAlignment(AlignmentToJson(r));
    EXPECT_EQ(back.frame_hop, r.frame_hop);
    EXPECT_EQ(back.source, r.source);
    ASSERT_EQ(back.duration.has_value(), r.duration.has_value());
    ASSERT_EQ(back.segments.size(), r.segments.size());
    for (std::size_t k = 0; k < r.segments.size(); ++k) {
      EXPECT_NEAR(back.segments[k].onset, r.segments[k].onset, 1e-6);
      EXPECT_NEAR(back.segments[k].offset, r.segments[k].offset, 1e-6);
      EXPECT_EQ(back.segments[k].character, "乙");
    }
    // Re-encoding the parsed result is a fixed point.
    EXPECT_EQ(AlignmentToJson(back), AlignmentToJson(JsonToAlignment(AlignmentToJson(back))));
  }
}

TEST(AlignmentJsonTest, EmptyIsValid) {
  AlignmentResult r;
  r.frame_hop = 0.02;
  AlignmentResult back = JsonToAlignment(AlignmentToJson(r));
  EXPECT_TRUE(back.segments.empty());
}

TEST(AlignmentJsonTest, RejectionsCarryPath) {
  const char *reversed =
      R"({"frame_hop":0.02,"segments":[{"char":"a","syllable":"a","onset":0.5,"offset":0.4}]})";
  try {
    JsonToAlignment(reversed);
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("/segments/0"), std::string::npos) << e.what();
  }
  const char *missing = R"({"frame_hop":0.02,"segments":[{"char":"a","onset":0.1}]})";
  try {
    JsonToAlignment(missing);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("/segments/0"), std::string::npos) << e.what();
  }
  EXPECT_THROW(JsonToAlignment("{not json"), Error);
  EXPECT_THROW(JsonToAlignment(R"({"frame_hop":-1,"segments":[]})"), Error);
}

}  // namespace
}  // namespace lyralign
