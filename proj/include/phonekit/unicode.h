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

// UTF-8 coding and canonical normalization. Backed by ICU.

#pragma once

#include <string>
#include <string_view>

namespace phonekit {

// Throws EncodingError carrying the byte offset of the first ill-formed unit.
std::u32string DecodeUtf8(std::string_view text);

std::string EncodeUtf8(std::u32string_view scalars);
std::string EncodeUtf8(char32_t scalar);

// Canonical decomposition (NFD). Idempotent.
std::string NormalizeNfd(std::string_view text);
bool IsNfd(std::string_view text);

// Unicode general-category queries used by the tokenizer.
bool IsCombiningMark(char32_t c);   // Mn, Mc, Me
bool IsModifierLetter(char32_t c);  // Lm
bool IsModifierSymbol(char32_t c);  // Sk
bool IsLetter(char32_t c);          // Ll, Lo, Lu, Lt
bool IsWhitespace(char32_t c);

// "U+02B0" style rendering, used in diagnostics and table files.
std::string CodePointLabel(char32_t c);

}  // namespace phonekit
