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

#include "phonekit/unicode.h"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <cstdio>

#include "phonekit/error.h"

namespace phonekit {

std::u32string DecodeUtf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const int32_t length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) {
      throw EncodingError("ill-formed UTF-8 at byte " + std::to_string(start),
                          static_cast<std::size_t>(start));
    }
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

std::string EncodeUtf8(std::u32string_view scalars) {
  std::string out;
  out.reserve(scalars.size());
  for (char32_t c : scalars) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
    if (error) {
      throw EncodingError("cannot encode " + CodePointLabel(c), 0);
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

std::string EncodeUtf8(char32_t scalar) {
  return EncodeUtf8(std::u32string_view(&scalar, 1));
}

namespace {

const icu::Normalizer2& NfdInstance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status) || nfd == nullptr) {
    throw Error(std::string("ICU NFD unavailable: ") + u_errorName(status));
  }
  return *nfd;
}

icu::UnicodeString ToIcu(std::string_view text) {
  // Validate first so callers get a byte position; ICU would substitute U+FFFD.
  DecodeUtf8(text);
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
}

int8_t Category(char32_t c) { return u_charType(static_cast<UChar32>(c)); }

}  // namespace

std::string NormalizeNfd(std::string_view text) {
  const icu::UnicodeString source = ToIcu(text);
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString normalized = NfdInstance().normalize(source, status);
  if (U_FAILURE(status)) {
    throw Error(std::string("NFD normalization failed: ") +
                u_errorName(status));
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

bool IsNfd(std::string_view text) {
  const icu::UnicodeString source = ToIcu(text);
  UErrorCode status = U_ZERO_ERROR;
  const UBool ok = NfdInstance().isNormalized(source, status);
  return U_SUCCESS(status) && ok;
}

bool IsCombiningMark(char32_t c) {
  const int8_t cat = Category(c);
  return cat == U_NON_SPACING_MARK || cat == U_COMBINING_SPACING_MARK ||
         cat == U_ENCLOSING_MARK;
}

bool IsModifierLetter(char32_t c) { return Category(c) == U_MODIFIER_LETTER; }

bool IsModifierSymbol(char32_t c) { return Category(c) == U_MODIFIER_SYMBOL; }

bool IsLetter(char32_t c) {
  const int8_t cat = Category(c);
  return cat == U_LOWERCASE_LETTER || cat == U_OTHER_LETTER ||
         cat == U_UPPERCASE_LETTER || cat == U_TITLECASE_LETTER;
}

bool IsWhitespace(char32_t c) {
  return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0;
}

std::string CodePointLabel(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(c));
  return buf;
}

}  // namespace phonekit
