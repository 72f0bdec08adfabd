// tests/codec_test.cpp

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
#include <random>

#include <gtest/gtest.h>

#include "lyralign/codec.hpp"

namespace lyralign {
namespace {

const char *kNiHao = "你\tni3\n好\thao3\n";

TEST(LexiconTest, TwoEntriesGiveFourClasses) {
  Lexicon lex = Lexicon::Parse(kNiHao);
  EXPECT_EQ(lex.syllable_count(), 2u);
  EXPECT_EQ(lex.class_count(), 4u);
  EXPECT_EQ(lex.silence_id(), 2u);
  EXPECT_EQ(lex.blank_id(), 3u);
  EXPECT_EQ(lex.syllable_table(), (std::vector<std::string>{"ni3", "hao3"}));
}

TEST(LexiconTest, FourHundredOneSyllablesGiveFourHundredThreeClasses) {
  std::string text;
  for (int i = 0; i < 401; ++i) {
    // Two characters per syllable; characters drawn from the CJK block.
    for (int k = 0; k < 2; ++k) {
      std::uint32_t cp = 0x4E00 + static_cast<std::uint32_t>(2 * i + k);
      text += static_cast<char>(0xE0 | (cp >> 12));
      text += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      text += static_cast<char>(0x80 | (cp & 0x3F));
      text += "\tsyl" + std::to_string(i) + "\n";
    }
  }
  Lexicon lex = Lexicon::Parse(text);
  EXPECT_EQ(lex.entry_count(), 802u);
  EXPECT_EQ(lex.class_count(), 403u);
}

TEST(LexiconTest, IdenticalDuplicateIsAccepted) {
  Lexicon lex = Lexicon::Parse("你\tni3\n你\tni3\n");
  EXPECT_EQ(lex.entry_count(), 1u);
  EXPECT_EQ(lex.class_count(), 3u);
}

TEST(LexiconTest, ConflictingDuplicateNamesCharacter) {
  try {
    Lexicon::Parse("你\tni3\n你\tni2\n");
    FAIL() << "expected an error";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("你"), std::string::npos);
  }
}

TEST(LexiconTest, MalformedLineReportsLineNumber) {
  try {
    Lexicon::Parse("# comment\n你\tni3\nbroken line\n");
    FAIL() << "expected an error";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(LexiconTest, CommentsAndBlankLinesSkipped) {
  Lexicon lex = Lexicon::Parse("# header\n\n你\tni3\r\n");
  EXPECT_EQ(lex.SyllableOf("你"), "ni3");
}

TEST(LexiconTest, RoundTripsThroughTsv) {
  Lexicon lex = Lexicon::Parse("# x\n你\tni3\n好\thao3\n尼\tni3\n");
  Lexicon again = Lexicon::Parse(lex.ToTsv());
  EXPECT_EQ(again.syllable_table(), lex.syllable_table());
  EXPECT_EQ(again.entry_count(), lex.entry_count());
}

TEST(CharsToSyllablesTest, DirectLookup) {
  Lexicon lex = Lexicon::Parse(kNiHao);
  auto ids = CharsToSyllables(LyricsSequence::FromText("你好"), lex);
  EXPECT_EQ(ids, (std::vector<SyllableId>{0, 1}));
}

TEST(CharsToSyllablesTest, EmptySequence) {
  Lexicon lex = Lexicon::Parse(kNiHao);
  EXPECT_TRUE(CharsToSyllables(LyricsSequence{}, lex).empty());
}

TEST(CharsToSyllablesTest, UnmappedCharacterReportsPosition) {
  Lexicon lex = Lexicon::Parse(kNiHao);
  try {
    CharsToSyllables(LyricsSequence::FromText("你X"), lex);
    FAIL() << "expected an error";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("position 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'X'"), std::string::npos);
  }
}

TEST(SyllablesEqualTest, Cases) {
  Lexicon lex = Lexicon::Parse("你\tni3\n好\thao3\n是\tshi4\n事\tshi4\n");
  EXPECT_TRUE(SyllablesEqual("你", "你", lex));
  EXPECT_TRUE(SyllablesEqual("是", "事", lex));
  EXPECT_FALSE(SyllablesEqual("你", "好", lex));
  EXPECT_THROW(SyllablesEqual("你", "X", lex), Error);
}

TEST(LyricsSequenceTest, FromTextDropsWhitespace) {
  auto seq = LyricsSequence::FromText("你 好\n　世界\r\n");
  EXPECT_EQ(seq.chars, (std::vector<std::string>{"你", "好", "世", "界"}));
}

// Permuting lexicon lines renumbers ids but never changes the syllable
// string recovered for any character, and reserved ids stay out of range.
TEST(LexiconProperty, LineOrderOnlyRenumbers) {
  std::vector<std::string> lines = {"你\tni3", "好\thao3", "是\tshi4", "事\tshi4",
                                    "我\two3", "爱\tai4",   "唱\tchang4"};
  const auto lyrics = LyricsSequence::FromText("我爱唱你好是事");
  const Lexicon base = Lexicon::Parse([&] {
    std::string t;
    for (auto &l : lines) t += l + "\n";
    return t;
  }());
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string text;
    for (auto &l : lines) text += l + "\n";
    Lexicon lex = Lexicon::Parse(text);
    auto ids = CharsToSyllables(lyrics, lex);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      EXPECT_EQ(lex.syllable_table()[ids[i]], base.SyllableOf(lyrics.chars[i]));
      EXPECT_LT(ids[i], lex.silence_id());
    }
    EXPECT_NE(lex.silence_id(), lex.blank_id());
  }
}

}  // namespace
}  // namespace lyralign
