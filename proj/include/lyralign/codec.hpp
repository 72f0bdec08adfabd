// include/lyralign/codec.hpp

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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lyralign/common.hpp"

namespace lyralign {

using SyllableId = std::uint32_t;

/// Ordered lyric characters, one UTF-8 code point per element.
struct LyricsSequence {
  std::vector<std::string> chars;

  std::size_t size() const { return chars.size(); }
  bool empty() const { return chars.empty(); }
  bool operator==(const LyricsSequence &) const = default;

  /// Every non-whitespace code point of `text`, in order.
  static LyricsSequence FromText(std::string_view text) {
    LyricsSequence seq;
    for (auto &cp : SplitUtf8(text)) {
      if (cp.size() == 1 && (cp[0] == ' ' || cp[0] == '\t' || cp[0] == '\n' ||
                             cp[0] == '\r' || cp[0] == '\f' || cp[0] == '\v'))
        continue;
      if (cp == "　") continue;  // ideographic space
      seq.chars.push_back(std::move(cp));
    }
    return seq;
  }
};

/// Character to syllable-class mapping. Syllable ids are dense in
/// first-appearance order; silence and the CTC blank follow them.
class Lexicon {
 public:
  Lexicon() = default;

  /// Builds from (character, syllable) pairs in order. An identical
  /// duplicate is ignored; a conflicting duplicate throws.
  static Lexicon FromEntries(
      const std::vector<std::pair<std::string, std::string>> &entries) {
    Lexicon lex;
    for (std::size_t i = 0; i < entries.size(); ++i)
      lex.Add(entries[i].first, entries[i].second, i + 1);
    return lex;
  }

  /// Parses the TSV format: `character<TAB>syllable` per line, `#` comments
  /// and blank lines skipped.
  static Lexicon Parse(std::string_view text) {
    Lexicon lex;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos)
        Fail(ErrorKind::kFormat, "lexicon line " + std::to_string(line_no) +
                                     ": expected `character<TAB>syllable`");
      std::string_view ch = line.substr(0, tab), syl = line.substr(tab + 1);
      std::vector<std::string> cps;
      try {
        cps = SplitUtf8(ch);
      } catch (const Error &e) {
        Fail(ErrorKind::kFormat, "lexicon line " + std::to_string(line_no) +
                                     ": " + e.what());
      }
      if (cps.size() != 1 || syl.empty() ||
          syl.find_first_of(" \t") != std::string_view::npos)
        Fail(ErrorKind::kFormat, "lexicon line " + std::to_string(line_no) +
                                     ": expected a single character and a "
                                     "non-empty syllable");
      lex.Add(std::string(ch), std::string(syl), line_no);
    }
    return lex;
  }

  static Lexicon Load(const std::filesystem::path &path) {
    std::string text = ReadTextFile(path);
    try {
      return Parse(text);
    } catch (const Error &e) {
      Fail(e.kind(), path.string() + ": " + e.what());
    }
  }

  /// Serializes to TSV in character insertion order.
  std::string ToTsv() const {
    std::string out;
    for (const auto &ch : char_order_) {
      out += ch;
      out += '\t';
      out += syllable_table_[entries_.at(ch)];
      out += '\n';
    }
    return out;
  }

  std::size_t syllable_count() const { return syllable_table_.size(); }
  std::size_t class_count() const { return syllable_table_.size() + 2; }
  SyllableId silence_id() const {
    return static_cast<SyllableId>(syllable_table_.size());
  }
  SyllableId blank_id() const {
    return static_cast<SyllableId>(syllable_table_.size() + 1);
  }
  std::size_t entry_count() const { return entries_.size(); }
  const std::vector<std::string> &syllable_table() const {
    return syllable_table_;
  }

  bool Contains(std::string_view ch) const {
    return entries_.find(std::string(ch)) != entries_.end();
  }

  SyllableId IdOf(std::string_view ch) const {
    auto it = entries_.find(std::string(ch));
    if (it == entries_.end())
      Fail(ErrorKind::kValidation, "unmapped character '" + std::string(ch) + "'");
    return it->second;
  }

  const std::string &SyllableOf(std::string_view ch) const {
    return syllable_table_[IdOf(ch)];
  }

  std::optional<SyllableId> IdOfSyllable(std::string_view syl) const {
    auto it = syllable_index_.find(std::string(syl));
    if (it == syllable_index_.end()) return std::nullopt;
    return it->second;
  }

  /// Human-readable name of any class id, including the reserved ones.
  std::string ClassName(SyllableId id) const {
    if (id < syllable_table_.size()) return syllable_table_[id];
    if (id == silence_id()) return "<sil>";
    if (id == blank_id()) return "<blank>";
    Fail(ErrorKind::kValidation, "class id " + std::to_string(id) +
                                     " out of range (class_count " +
                                     std::to_string(class_count()) + ")");
  }

 private:
  void Add(const std::string &ch, const std::string &syl, std::size_t line) {
    auto it = entries_.find(ch);
    if (it != entries_.end()) {
      if (syllable_table_[it->second] == syl) return;
      Fail(ErrorKind::kValidation,
           "lexicon entry " + std::to_string(line) + ": character '" + ch +
               "' maps to both '" + syllable_table_[it->second] + "' and '" +
               syl + "'");
    }
    auto [sit, inserted] = syllable_index_.try_emplace(
        syl, static_cast<SyllableId>(syllable_table_.size()));
    if (inserted) syllable_table_.push_back(syl);
    entries_.emplace(ch, sit->second);
    char_order_.push_back(ch);
  }

  std::unordered_map<std::string, SyllableId> entries_;
  std::unordered_map<std::string, SyllableId> syllable_index_;
  std::vector<std::string> syllable_table_;
  std::vector<std::string> char_order_;
};

inline Lexicon LoadLexicon(const std::filesystem::path &path) {
  return Lexicon::Load(path);
}

/// Class id of every character, in order. Never yields silence or blank.
inline std::vector<SyllableId> CharsToSyllables(const LyricsSequence &lyrics,
                                                const Lexicon &lex) {
  std::vector<SyllableId> ids;
  ids.reserve(lyrics.size());
  for (std::size_t i = 0; i < lyrics.size(); ++i) {
    if (!lex.Contains(lyrics.chars[i]))
      Fail(ErrorKind::kValidation, "unmapped character '" + lyrics.chars[i] +
                                       "' at position " + std::to_string(i));
    ids.push_back(lex.IdOf(lyrics.chars[i]));
  }
  return ids;
}

/// True iff both characters have the same syllable string.
inline bool SyllablesEqual(std::string_view a, std::string_view b,
                           const Lexicon &lex) {
  return lex.SyllableOf(a) == lex.SyllableOf(b);
}

}  // namespace lyralign
