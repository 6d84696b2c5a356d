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

#include "phonekit/ipa.h"

#include <algorithm>
#include <istream>
#include <sstream>

#include "phonekit/error.h"
#include "phonekit/unicode.h"

namespace phonekit {

namespace {

constexpr char32_t kRenderedWordBoundary = U'#';

MarkClassTable BuildDefaultTable() {
  MarkClassTable t;
  t.Set(U'\u02D0', MarkClass::kLength);  // long
  t.Set(U'\u02D1', MarkClass::kLength);  // half-long
  t.Set(U'\u0306', MarkClass::kLength);  // extra-short (combining breve)

  t.Set(U'.', MarkClass::kBreakOrTie);
  t.Set(U'|', MarkClass::kBreakOrTie);       // minor group
  t.Set(U'\u2016', MarkClass::kBreakOrTie);  // major group
  t.Set(U'\u0361', MarkClass::kBreakOrTie);  // tie above
  t.Set(U'\u035C', MarkClass::kBreakOrTie);  // tie below

  // Tone letters and tone diacritics. The caron (U+030C) is a rising contour
  // here, never the extra-short mark.
  for (char32_t c = U'\u02E5'; c <= U'\u02E9'; ++c) t.Set(c, MarkClass::kTone);
  for (char32_t c : {U'\u0300', U'\u0301', U'\u0302', U'\u0304', U'\u030B',
                     U'\u030C', U'\u030F', U'\u1DC4', U'\u1DC5', U'\u1DC6',
                     U'\u1DC7', U'\u1DC8', U'\u1DC9', U'\uA717', U'\uA718',
                     U'\uA719', U'\uA71A'}) {
    t.Set(c, MarkClass::kTone);
  }

  // Free-standing prosodic symbols. Stress marks are modifier letters and
  // would otherwise attach to the preceding phone.
  for (char32_t c : {U'\u02C8', U'\u02CC', U'\u2197', U'\u2198', U'\uA71B',
                     U'\uA71C'}) {
    t.Set(c, MarkClass::kOther);
  }

  // Common attaching diacritics and modifiers. Any other combining mark or
  // modifier letter classifies as attaching without an entry.
  for (char32_t c :
       {U'\u02B0', U'\u02B1', U'\u02B2', U'\u02B7', U'\u02E0', U'\u02E4',
        U'\u207F', U'\u02E1', U'\u02BC', U'\u02DE', U'\u0303', U'\u0325',
        U'\u030A', U'\u0329', U'\u030D', U'\u032F', U'\u0311', U'\u032A',
        U'\u033A', U'\u033B', U'\u031D', U'\u031E', U'\u0318', U'\u0319',
        U'\u031F', U'\u0320', U'\u0308', U'\u033D', U'\u0324', U'\u0330',
        U'\u0334', U'\u0339', U'\u031C', U'\u031A', U'\u0348', U'\u0353'}) {
    t.Set(c, MarkClass::kAttaching);
  }
  return t;
}

bool IsBaseLetter(char32_t c, const MarkClassTable& marks) {
  return IsLetter(c) && !marks.Classify(c).has_value();
}

std::string Describe(char32_t c) {
  return CodePointLabel(c) + " '" + EncodeUtf8(c) + "'";
}

}  // namespace

std::string_view MarkClassName(MarkClass cls) {
  switch (cls) {
    case MarkClass::kAttaching:
      return "attaching";
    case MarkClass::kLength:
      return "length";
    case MarkClass::kBreakOrTie:
      return "break-or-tie";
    case MarkClass::kTone:
      return "tone";
    case MarkClass::kOther:
      return "other";
  }
  return "other";
}

std::optional<MarkClass> ParseMarkClass(std::string_view name) {
  for (MarkClass cls : {MarkClass::kAttaching, MarkClass::kLength,
                        MarkClass::kBreakOrTie, MarkClass::kTone,
                        MarkClass::kOther}) {
    if (MarkClassName(cls) == name) return cls;
  }
  return std::nullopt;
}

const MarkClassTable& MarkClassTable::Default() {
  static const MarkClassTable table = BuildDefaultTable();
  return table;
}

MarkClassTable MarkClassTable::Load(std::istream& in,
                                    const MarkClassTable& base) {
  MarkClassTable table = base;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const std::string where = "mark table line " + std::to_string(line_no);
    if (tab == std::string::npos) throw Error(where + ": expected a tab");
    const std::string code = line.substr(0, tab);
    const std::string name = line.substr(tab + 1);
    if (code.size() < 3 || code[0] != 'U' || code[1] != '+') {
      throw Error(where + ": expected U+XXXX, got '" + code + "'");
    }
    std::size_t used = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(code.substr(2), &used, 16);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != code.size() - 2 || value > 0x10FFFF) {
      throw Error(where + ": bad code point '" + code + "'");
    }
    const auto cls = ParseMarkClass(name);
    if (!cls) throw Error(where + ": unknown class '" + name + "'");
    table.Set(static_cast<char32_t>(value), *cls);
  }
  return table;
}

std::optional<MarkClass> MarkClassTable::Lookup(char32_t c) const {
  const auto it = entries_.find(c);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<MarkClass> MarkClassTable::Classify(char32_t c) const {
  if (auto explicit_class = Lookup(c)) return explicit_class;
  if (IsCombiningMark(c) || IsModifierLetter(c) || IsModifierSymbol(c)) {
    return MarkClass::kAttaching;
  }
  return std::nullopt;
}

bool MarkClassTable::IsTie(char32_t c) const {
  return Lookup(c) == MarkClass::kBreakOrTie && IsCombiningMark(c);
}

PhoneToken::PhoneToken(char32_t base, std::u32string marks)
    : base_(base), marks_(std::move(marks)) {
  if (IsCombiningMark(base_)) {
    throw Error("phone token cannot start with combining mark " +
                Describe(base_));
  }
  for (char32_t m : marks_) {
    if (IsWhitespace(m) || m == U'/') {
      throw Error("phone token marks cannot contain " + Describe(m));
    }
  }
  surface_ = EncodeUtf8(base_) + EncodeUtf8(marks_);
}

PhoneToken PhoneToken::FromSurface(std::string_view text,
                                   const MarkClassTable& marks) {
  PhoneSequence seq = Tokenize(text, marks);
  if (seq.tokens.size() != 1 || !seq.boundaries.empty()) {
    throw Error("'" + std::string(text) + "' is not a single phone token");
  }
  return std::move(seq.tokens.front());
}

std::u32string PhoneToken::scalars() const {
  std::u32string out(1, base_);
  out += marks_;
  return out;
}

void PhoneSequence::Validate() const {
  std::size_t last = 0;
  for (const Boundary& b : boundaries) {
    if (b.position > tokens.size()) {
      throw Error("boundary position " + std::to_string(b.position) +
                  " exceeds phone count " + std::to_string(tokens.size()));
    }
    if (b.position < last) throw Error("boundary positions must not decrease");
    last = b.position;
  }
}

std::vector<std::pair<std::size_t, std::size_t>> PhoneSequence::WordSpans()
    const {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t begin = 0;
  for (const Boundary& b : boundaries) {
    if (b.kind != BoundaryKind::kWord) continue;
    if (b.position > begin) spans.emplace_back(begin, b.position);
    begin = std::max(begin, b.position);
  }
  if (tokens.size() > begin) spans.emplace_back(begin, tokens.size());
  return spans;
}

std::string PhoneSequence::Spell() const {
  std::string out;
  std::size_t b = 0;
  for (std::size_t i = 0; i <= tokens.size(); ++i) {
    while (b < boundaries.size() && boundaries[b].position == i) {
      out += EncodeUtf8(boundaries[b].symbol);
      ++b;
    }
    if (i < tokens.size()) out += tokens[i].surface();
  }
  return out;
}

std::string NormalizeIpa(std::string_view text) { return NormalizeNfd(text); }

PhoneSequence Tokenize(std::string_view ipa, const MarkClassTable& marks,
                       const TokenizeOptions& options,
                       std::vector<SkippedScalar>* skipped) {
  const std::u32string s = DecodeUtf8(NormalizeNfd(ipa));
  PhoneSequence seq;

  // Pending token being assembled; flushed at boundaries and new bases.
  std::optional<std::pair<char32_t, std::u32string>> pending;
  auto flush = [&] {
    if (pending) {
      seq.tokens.emplace_back(pending->first, std::move(pending->second));
      pending.reset();
    }
  };
  auto reject = [&](std::size_t i, const std::string& reason) {
    if (!options.lenient) {
      throw TokenizeError(reason + " at index " + std::to_string(i), i);
    }
    if (skipped) skipped->push_back({i, s[i], reason});
  };
  auto add_boundary = [&](BoundaryKind kind, char32_t symbol) {
    flush();
    seq.boundaries.push_back({seq.tokens.size(), kind, symbol});
  };

  for (std::size_t i = 0; i < s.size(); ++i) {
    const char32_t c = s[i];
    if (IsWhitespace(c)) {
      add_boundary(BoundaryKind::kWord, c);
      continue;
    }
    const auto cls = marks.Classify(c);
    if (cls == MarkClass::kOther ||
        (cls == MarkClass::kBreakOrTie && !IsCombiningMark(c))) {
      add_boundary(BoundaryKind::kSyllable, c);
      continue;
    }
    if (cls) {
      if (!pending) {
        reject(i, "mark " + Describe(c) + " has no base");
        continue;
      }
      if (marks.IsTie(c)) {
        if (i + 1 >= s.size() || !IsBaseLetter(s[i + 1], marks)) {
          reject(i, "tie " + Describe(c) + " is not followed by a base");
          continue;
        }
        pending->second.push_back(c);
        pending->second.push_back(s[i + 1]);
        ++i;
        continue;
      }
      pending->second.push_back(c);
      continue;
    }
    if (IsBaseLetter(c, marks)) {
      flush();
      pending.emplace(c, std::u32string{});
      continue;
    }
    reject(i, "character " + Describe(c) + " is outside the IPA repertoire");
  }
  flush();
  return seq;
}

std::vector<std::string> SlashTokens(const PhoneSequence& seq) {
  std::vector<std::string> out;
  out.reserve(seq.tokens.size());
  for (const PhoneToken& t : seq.tokens) out.push_back("/" + t.surface() + "/");
  return out;
}

std::string RenderSlash(const PhoneSequence& seq,
                        const RenderOptions& options) {
  std::vector<std::string> items;
  std::size_t b = 0;
  for (std::size_t i = 0; i <= seq.tokens.size(); ++i) {
    for (; b < seq.boundaries.size() && seq.boundaries[b].position == i; ++b) {
      const Boundary& boundary = seq.boundaries[b];
      if (boundary.kind == BoundaryKind::kSyllable &&
          options.syllable_boundaries) {
        items.push_back(EncodeUtf8(boundary.symbol));
      } else if (boundary.kind == BoundaryKind::kWord &&
                 options.word_boundaries) {
        items.push_back(EncodeUtf8(kRenderedWordBoundary));
      }
    }
    if (i < seq.tokens.size()) {
      items.push_back("/" + seq.tokens[i].surface() + "/");
    }
  }
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ' ';
    out += items[i];
  }
  return out;
}

std::string UnrenderSlash(std::string_view rendered) {
  std::string out;
  std::istringstream in{std::string(rendered)};
  std::string item;
  while (in >> item) {
    if (item == "#") {
      out += ' ';
    } else if (item.size() >= 3 && item.front() == '/' && item.back() == '/') {
      out += item.substr(1, item.size() - 2);
    } else if (item.find('/') == std::string::npos) {
      out += item;  // rendered syllable boundary
    } else {
      throw Error("malformed slash token '" + item + "'");
    }
  }
  return out;
}

PhoneSequence StripSuprasegmentals(const PhoneSequence& seq,
                                   const MarkClassTable& marks,
                                   const StripOptions& options) {
  auto drop = [&](char32_t c) {
    const auto cls = marks.Lookup(c);
    if (cls == MarkClass::kLength) return true;
    if (marks.IsTie(c)) return true;
    return options.strip_tones && cls == MarkClass::kTone;
  };

  PhoneSequence out;
  std::size_t b = 0;
  for (std::size_t i = 0; i <= seq.tokens.size(); ++i) {
    for (; b < seq.boundaries.size() && seq.boundaries[b].position == i; ++b) {
      if (seq.boundaries[b].kind == BoundaryKind::kWord) {
        Boundary kept = seq.boundaries[b];
        kept.position = out.tokens.size();
        out.boundaries.push_back(kept);
      }
    }
    if (i == seq.tokens.size()) break;
    const PhoneToken& token = seq.tokens[i];
    // Former tied bases start new tokens once the tie is gone.
    std::u32string base_and_marks(1, token.base());
    bool after_tie = false;
    for (char32_t m : token.marks()) {
      if (after_tie) {
        out.tokens.emplace_back(base_and_marks.front(),
                                base_and_marks.substr(1));
        base_and_marks.assign(1, m);
        after_tie = false;
        continue;
      }
      if (marks.IsTie(m)) {
        after_tie = true;
        continue;
      }
      if (!drop(m)) base_and_marks.push_back(m);
    }
    out.tokens.emplace_back(base_and_marks.front(), base_and_marks.substr(1));
  }
  return out;
}

std::vector<std::string> PterTokens(const PhoneSequence& seq) {
  std::vector<std::string> out;
  for (const PhoneToken& t : seq.tokens) {
    out.push_back(EncodeUtf8(t.base()));
    for (char32_t m : t.marks()) out.push_back(EncodeUtf8(m));
  }
  return out;
}

std::size_t TotalMarkCount(const PhoneSequence& seq) {
  std::size_t n = 0;
  for (const PhoneToken& t : seq.tokens) n += t.marks().size();
  return n;
}

}  // namespace phonekit
