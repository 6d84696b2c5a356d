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

#include "phonekit/g2p_refine.h"

#include <algorithm>
#include <set>

#include "phonekit/error.h"
#include "phonekit/unicode.h"

namespace phonekit {

namespace {

constexpr char32_t kAspiration = U'\u02B0';
constexpr char32_t kNasalTilde = U'\u0303';
constexpr char32_t kVelarizedL = U'\u026B';

bool IsPlain(const PhoneToken& t, char32_t base) {
  return t.base() == base && t.marks().empty();
}

bool IsPlainOneOf(const PhoneToken& t, std::u32string_view bases) {
  return t.marks().empty() && bases.find(t.base()) != std::u32string_view::npos;
}

char32_t Devoiced(char32_t base) {
  switch (base) {
    case U'b':
      return U'p';
    case U'd':
      return U't';
    default:
      return U'k';  // g and script g (U+0261)
  }
}

bool IsNasalConsonant(const PhoneToken& t) {
  const std::u32string_view nasals = U"mn\u014B";
  return nasals.find(t.base()) != std::u32string_view::npos &&
         !t.HasMark(U'\u0361') && !t.HasMark(U'\u035C');
}

PhoneToken WithTilde(const PhoneToken& t) {
  std::u32string scalars(1, t.base());
  scalars.push_back(kNasalTilde);
  scalars += t.marks();
  return PhoneToken::FromSurface(NormalizeNfd(EncodeUtf8(scalars)));
}

}  // namespace

bool IsVowel(const PhoneToken& phone, const RefineOptions& options) {
  if (options.table) {
    try {
      const LookupResult r =
          options.table->Lookup(phone, LookupFallback::kStripMarks);
      return r.vector.Get("syl") == Ternary::kPlus;
    } catch (const UnknownPhoneError&) {
      // fall through to the embedded list
    }
  }
  static const std::u32string_view kVowels =
      U"iyɨʉɯuɪʏʊ"
      U"eøɘɵɤoə"
      U"ɛœɜɞʌɔ"
      U"æɐaɶɑɒɚɝ";
  return kVowels.find(phone.base()) != std::u32string_view::npos;
}

PhoneSequence RefineEnglish(const PhoneSequence& seq,
                            const RefineOptions& options,
                            std::vector<RuleApplication>* applied) {
  seq.Validate();
  auto note = [&](RefinementRule rule, std::size_t i) {
    if (applied) applied->push_back({rule, i});
  };

  std::set<std::size_t> syllable_breaks;
  for (const Boundary& b : seq.boundaries) {
    if (b.kind == BoundaryKind::kSyllable) syllable_breaks.insert(b.position);
  }

  PhoneSequence out = seq;
  const auto& in = seq.tokens;
  for (const auto& [begin, end] : seq.WordSpans()) {
    // Rules 1 and 2: word-initial plosives.
    const PhoneToken& first = in[begin];
    if (IsPlainOneOf(first, U"ptk")) {
      out.tokens[begin] = PhoneToken(first.base(), std::u32string(1, kAspiration));
      note(RefinementRule::kAspirateVoiceless, begin);
    } else if (IsPlainOneOf(first, U"bdg\u0261")) {
      out.tokens[begin] = PhoneToken(Devoiced(first.base()));
      note(RefinementRule::kDevoiceVoiced, begin);
    }

    for (std::size_t i = begin; i < end; ++i) {
      const bool word_final = i + 1 == end;
      // Rule 3: coda /l/, i.e. before a word edge, a syllable break or a
      // consonant.
      if (IsPlain(in[i], U'l')) {
        if (word_final || syllable_breaks.contains(i + 1) ||
            !IsVowel(in[i + 1], options)) {
          out.tokens[i] = PhoneToken(kVelarizedL);
          note(RefinementRule::kVelarizeLateral, i);
        }
      }
      // Rule 4: vowel directly before a nasal in the same word.
      if (!word_final && IsVowel(in[i], options) &&
          IsNasalConsonant(in[i + 1]) && !in[i].HasMark(kNasalTilde)) {
        out.tokens[i] = WithTilde(in[i]);
        note(RefinementRule::kNasalizeVowel, i);
      }
    }
  }
  return out;
}

}  // namespace phonekit
