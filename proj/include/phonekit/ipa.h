// Copyright 2026 The phonekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// IPA phone tokenization.
//
// A phone token is a base letter followed by every diacritic or modifier that
// attaches to it. Tie bars (U+0361, U+035C) glue two bases into one token, so
// an affricate such as t͡ʃ is a single phone. Whitespace separates words and
// '.' separates syllables; both are kept as boundaries so that the token
// surfaces plus boundary symbols spell out the NFD input exactly.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace phonekit {

enum class MarkClass {
  kAttaching,   // diacritics and modifier letters (ʰ ʷ ̃ ̥ ...)
  kLength,      // ː ˑ and the extra-short breve
  kBreakOrTie,  // '.' (non-combining, a boundary) and the tie bars
  kTone,        // tone letters and tone diacritics
  kOther,       // free-standing prosodic symbols (ˈ ˌ ↗ ...); act as boundaries
};

std::string_view MarkClassName(MarkClass cls);
std::optional<MarkClass> ParseMarkClass(std::string_view name);

class MarkClassTable {
 public:
  // The built-in inventory.
  static const MarkClassTable& Default();

  // Reads "U+XXXX<TAB>class" lines on top of `base`. Blank lines and lines
  // starting with '#' are ignored.
  static MarkClassTable Load(std::istream& in,
                             const MarkClassTable& base = Default());

  void Set(char32_t c, MarkClass cls) { entries_[c] = cls; }

  // Explicit table entry only.
  std::optional<MarkClass> Lookup(char32_t c) const;

  // Explicit entry, else kAttaching for any combining mark, modifier letter or
  // modifier symbol; nullopt for scalars that are not marks.
  std::optional<MarkClass> Classify(char32_t c) const;

  bool IsTie(char32_t c) const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<char32_t, MarkClass> entries_;
};

class PhoneToken {
 public:
  PhoneToken() = default;
  // Throws Error if the invariants do not hold (base is a combining mark,
  // marks contain whitespace or '/').
  PhoneToken(char32_t base, std::u32string marks = {});

  // Parses a single token from text (NFD-normalized first). Throws if the
  // text does not form exactly one token.
  static PhoneToken FromSurface(std::string_view text,
                                const MarkClassTable& marks =
                                    MarkClassTable::Default());

  char32_t base() const { return base_; }
  const std::u32string& marks() const { return marks_; }
  const std::string& surface() const { return surface_; }
  std::u32string scalars() const;

  bool HasMark(char32_t c) const {
    return marks_.find(c) != std::u32string::npos;
  }

  friend bool operator==(const PhoneToken& a, const PhoneToken& b) {
    return a.surface_ == b.surface_;
  }
  friend auto operator<=>(const PhoneToken& a, const PhoneToken& b) {
    return a.surface_ <=> b.surface_;
  }

 private:
  char32_t base_ = 0;
  std::u32string marks_;
  std::string surface_;
};

enum class BoundaryKind { kWord, kSyllable };

struct Boundary {
  std::size_t position = 0;  // number of tokens preceding the boundary
  BoundaryKind kind = BoundaryKind::kWord;
  char32_t symbol = U' ';

  friend bool operator==(const Boundary&, const Boundary&) = default;
};

struct PhoneSequence {
  std::vector<PhoneToken> tokens;
  std::vector<Boundary> boundaries;

  std::size_t phone_count() const { return tokens.size(); }
  bool empty() const { return tokens.empty() && boundaries.empty(); }

  // Throws Error if boundaries are out of range or decreasing.
  void Validate() const;

  // Token index ranges [begin, end) of the words, split at word boundaries.
  std::vector<std::pair<std::size_t, std::size_t>> WordSpans() const;

  // Token surfaces and boundary symbols in order.
  std::string Spell() const;

  friend bool operator==(const PhoneSequence&,
                         const PhoneSequence&) = default;
};

struct TokenizeOptions {
  // Lenient mode skips scalars outside the repertoire (and dangling marks)
  // instead of failing; every skip is reported.
  bool lenient = false;
};

struct SkippedScalar {
  std::size_t index;  // scalar index in the NFD text
  char32_t scalar;
  std::string reason;
};

// Unicode canonical decomposition; throws EncodingError on ill-formed input.
std::string NormalizeIpa(std::string_view text);

PhoneSequence Tokenize(std::string_view ipa,
                       const MarkClassTable& marks = MarkClassTable::Default(),
                       const TokenizeOptions& options = {},
                       std::vector<SkippedScalar>* skipped = nullptr);

struct RenderOptions {
  bool syllable_boundaries = false;  // rendered as "."
  bool word_boundaries = false;      // rendered as "#"
};

// "/pʰ/ /ɔ/ /s/ /ə/ /m/".
std::string RenderSlash(const PhoneSequence& seq,
                        const RenderOptions& options = {});
std::vector<std::string> SlashTokens(const PhoneSequence& seq);

// Inverse of RenderSlash: drops slashes and separators, maps "#" back to a
// space. Throws Error on malformed input.
std::string UnrenderSlash(std::string_view rendered);

struct StripOptions {
  bool strip_tones = false;
};

// Removes length marks, syllable boundaries and tie bars (splitting tied
// tokens into their component bases), and tone marks when requested.
PhoneSequence StripSuprasegmentals(
    const PhoneSequence& seq,
    const MarkClassTable& marks = MarkClassTable::Default(),
    const StripOptions& options = {});

// Every base and every mark as its own token, in order.
std::vector<std::string> PterTokens(const PhoneSequence& seq);

std::size_t TotalMarkCount(const PhoneSequence& seq);

}  // namespace phonekit
