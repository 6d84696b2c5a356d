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

// Voice-onset-time refinements for broad English G2P transcriptions
// (pipeline "eng-vot-v1"):
//
//   1. word-initial p t k          -> pʰ tʰ kʰ
//   2. word-initial b d g          -> p t k (plain, never aspirated)
//   3. syllable-final l            -> ɫ
//   4. vowel before m n ŋ          -> vowel + combining tilde
//
// Every rule reads the input sequence, not the output of earlier rules, so a
// plosive devoiced by rule 2 is not aspirated by rule 1.

#pragma once

#include <string_view>
#include <vector>

#include "phonekit/feature_table.h"
#include "phonekit/ipa.h"

namespace phonekit {

inline constexpr std::string_view kEnglishPipelineName = "eng-vot-v1";

enum class RefinementRule {
  kAspirateVoiceless = 1,
  kDevoiceVoiced = 2,
  kVelarizeLateral = 3,
  kNasalizeVowel = 4,
};

struct RuleApplication {
  RefinementRule rule;
  std::size_t position;
};

struct RefineOptions {
  // When set, vowels are phones whose "syl" feature is '+'. Otherwise (or
  // when a phone is missing from the table) an embedded vowel list is used.
  const FeatureTable* table = nullptr;
};

// Sequence edges count as word edges. Throws Error if the boundary list is
// malformed. Phones outside the English inventory pass through unchanged.
PhoneSequence RefineEnglish(const PhoneSequence& seq,
                            const RefineOptions& options = {},
                            std::vector<RuleApplication>* applied = nullptr);

bool IsVowel(const PhoneToken& phone, const RefineOptions& options = {});

}  // namespace phonekit
