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

// Error-rate metrics over phone, phone-token, word and character sequences.
//
//   PFER  articulatory-feature edit distance: substitution costs the number
//         of differing features / 24, insertion and deletion cost 1.
//   PER   unit-cost edit distance over whole phone tokens.
//   PTER  unit-cost edit distance with diacritics and modifiers split off.
//   WER   unit-cost edit distance over whitespace-separated words.
//   CER   unit-cost edit distance over non-whitespace Unicode scalars.
//
// All rates are normalized by the reference length.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phonekit/edit_distance.h"
#include "phonekit/feature_table.h"
#include "phonekit/ipa.h"
#include "phonekit/rational.h"

namespace phonekit {

enum class Metric { kPfer, kPer, kPter, kWer, kCer };

std::string_view MetricName(Metric metric);
std::optional<Metric> ParseMetric(std::string_view name);

struct UtteranceScore {
  Rational distance;
  std::int64_t ref_units = 0;
  std::size_t degraded_lookups = 0;  // PFER only

  // distance / ref_units. Throws Error when the reference is empty.
  Rational Rate() const;
};

// Alignment of two phone sequences under the PFER costs.
AlignmentResult AlignFeatures(const PhoneSequence& hyp,
                              const PhoneSequence& ref,
                              const FeatureTable& table,
                              LookupFallback fallback = LookupFallback::kError,
                              std::size_t* degraded_lookups = nullptr);

UtteranceScore ScorePfer(const PhoneSequence& hyp, const PhoneSequence& ref,
                         const FeatureTable& table,
                         LookupFallback fallback = LookupFallback::kError);
UtteranceScore ScorePer(const PhoneSequence& hyp, const PhoneSequence& ref);
UtteranceScore ScorePter(const PhoneSequence& hyp, const PhoneSequence& ref);
UtteranceScore ScoreWer(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref);
UtteranceScore ScoreCer(std::u32string_view hyp, std::u32string_view ref);

// Rates. Throw Error on an empty reference.
Rational Pfer(const PhoneSequence& hyp, const PhoneSequence& ref,
              const FeatureTable& table,
              LookupFallback fallback = LookupFallback::kError);
Rational Per(const PhoneSequence& hyp, const PhoneSequence& ref);
Rational Pter(const PhoneSequence& hyp, const PhoneSequence& ref);
Rational Wer(const std::vector<std::string>& hyp,
             const std::vector<std::string>& ref);
Rational Cer(std::u32string_view hyp, std::u32string_view ref);

std::vector<std::string> SplitWords(std::string_view text);
std::u32string ScoringCharacters(std::string_view text);

// Corpus scoring.

struct ScorePair {
  std::string id;
  std::string lang;
  std::string hyp;  // IPA for phone metrics, plain text for WER/CER
  std::string ref;
};

struct CorpusOptions {
  Metric metric = Metric::kPfer;
  const FeatureTable* table = nullptr;  // required for PFER
  const MarkClassTable* marks = nullptr;  // defaults to the built-in table
  LookupFallback fallback = LookupFallback::kStripMarks;
  bool lenient_hypotheses = true;  // references are always parsed strictly
  unsigned jobs = 1;
};

struct UtteranceRow {
  std::string id;
  std::string lang;
  UtteranceScore score;
};

struct LanguageTotals {
  Rational distance;
  std::int64_t ref_units = 0;
  std::size_t utterances = 0;
  Rational rate_sum;  // sum of per-utterance rates, for the macro average
};

struct PairFailure {
  std::string id;
  std::string message;
};

struct CorpusScore {
  Metric metric = Metric::kPfer;
  Rational total_distance;
  std::int64_t total_ref_units = 0;
  Rational rate_sum;
  std::vector<UtteranceRow> per_utterance;  // sorted by id
  std::map<std::string, LanguageTotals> per_language;
  std::vector<PairFailure> failures;  // sorted by id

  // Micro average (sum of distances / sum of reference units) by default;
  // mean of per-utterance rates when `macro` is set.
  Rational Score(bool macro = false) const;
  static Rational Score(const LanguageTotals& totals, bool macro);
};

// Duplicate ids throw Error. Failures of individual pairs (unknown phones,
// empty references, bad IPA) are collected, not thrown. The result does not
// depend on input order or on `jobs`.
CorpusScore ScoreCorpus(const std::vector<ScorePair>& pairs,
                        const CorpusOptions& options);

UtteranceScore ScoreOne(const ScorePair& pair, const CorpusOptions& options);

struct ReportOptions {
  bool macro = false;
  int digits = 6;
};

// TSV: one row per utterance (id, lang, metric, distance, ref_units, score),
// a "#corpus" summary row, then a per-language table with languages as
// columns.
void WriteTsvReport(const CorpusScore& score, std::ostream& out,
                    const ReportOptions& options = {});
void WriteJsonReport(const CorpusScore& score, std::ostream& out,
                     const ReportOptions& options = {});

}  // namespace phonekit
