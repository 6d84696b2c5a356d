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

// Corpus ingestion and four-task manifest generation.
//
// Each utterance yields one example per task:
//
//   task  prompt              target
//   PR    <na>                phones
//   ASR   <na>                graphemes
//   G2P   graphemes           phones
//   P2G   phones              graphemes
//
// Phones are slash-wrapped ("/pʰ/") so they never collide with grapheme
// subwords. Task and language token surfaces are this toolkit's own choice.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "phonekit/g2p_refine.h"
#include "phonekit/ipa.h"

namespace phonekit {

struct Utterance {
  std::string id;
  std::string lang;  // ISO 639-3 or "unk"
  std::string text;
  std::string ipa;
  std::optional<double> duration_s;
  std::optional<std::string> audio;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

bool IsValidLanguageCode(std::string_view lang);

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

// Streaming reader over line-delimited JSON utterances. Blank lines are
// skipped. A bad record yields a RecordError and the stream continues.
class CorpusReader {
 public:
  explicit CorpusReader(std::istream& in) : in_(in) {}

  // nullopt at end of input.
  std::optional<std::variant<Utterance, RecordError>> Next();

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

Utterance ParseUtterance(std::string_view json_line);

// Filtering.

inline constexpr std::size_t kDefaultMaxPhones = 300;

struct FilterOptions {
  std::size_t max_phones = kDefaultMaxPhones;  // inclusive limit
  std::set<std::string> lang_blocklist;
  std::optional<double> min_duration_s;
  std::optional<double> max_duration_s;
  const MarkClassTable* marks = nullptr;
};

inline constexpr std::string_view kDropMaxPhones = "max_phones";
inline constexpr std::string_view kDropLangBlocklist = "lang_blocklist";
inline constexpr std::string_view kDropMinDuration = "min_duration";
inline constexpr std::string_view kDropMaxDuration = "max_duration";
inline constexpr std::string_view kDropUntokenizable = "untokenizable";

struct LanguageRetention {
  std::size_t utterances = 0;
  double seconds = 0;  // sum over utterances that carry a duration
};

struct DropReport {
  std::size_t seen = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> count
  std::map<std::string, LanguageRetention> retained;  // lang -> kept stats
  std::vector<std::pair<std::string, std::string>> drops;  // (id, reason)

  void WriteTsv(std::ostream& out) const;
};

class UtteranceFilter {
 public:
  explicit UtteranceFilter(FilterOptions options)
      : options_(std::move(options)) {}

  // Returns the drop reason, or nullopt if the utterance is kept. Updates the
  // report either way.
  std::optional<std::string> Check(const Utterance& utt);

  const DropReport& report() const { return report_; }

 private:
  FilterOptions options_;
  DropReport report_;
};

// Languages whose retained hours exceed `max_hours`, for hour-threshold
// selection of low-resource languages.
std::vector<std::string> LanguagesAboveHours(const DropReport& report,
                                             double max_hours);

// Grapheme tokenization.

inline constexpr std::string_view kWordMarker = "\u2581";

// Greedy longest-match segmentation over a subword list, with spaces
// written as U+2581 and a leading U+2581 on the text (SentencePiece style).
// Scalars not covered by the list become single-scalar pieces.
class GraphemeTokenizer {
 public:
  GraphemeTokenizer() = default;
  explicit GraphemeTokenizer(const std::vector<std::string>& subwords);

  std::vector<std::string> Tokenize(std::string_view text) const;
  static std::string Detokenize(const std::vector<std::string>& pieces);

 private:
  std::set<std::u32string> pieces_;
  std::size_t longest_ = 1;
};

// Examples.

enum class Task { kPr, kAsr, kG2p, kP2g };

std::string_view TaskToken(Task task);  // "<pr>", "<asr>", "<g2p>", "<p2g>"
std::string_view TaskName(Task task);   // "pr", ...

inline constexpr std::string_view kNoPromptToken = "<na>";

std::string LanguageToken(std::string_view lang);  // "<eng>"

struct TaskExample {
  Task task = Task::kPr;
  std::string utterance_id;
  std::string lang_token;
  std::vector<std::string> prompt;
  std::vector<std::string> target;
  std::vector<std::string> ctc_target;  // suprasegmentals stripped
  std::optional<std::string> audio;

  friend bool operator==(const TaskExample&, const TaskExample&) = default;
};

struct ExampleOptions {
  bool refine_english = false;
  RefineOptions refine;
  StripOptions strip;
  const MarkClassTable* marks = nullptr;
  const GraphemeTokenizer* graphemes = nullptr;
};

// The phone sequence used for an utterance (tokenized, refined for English
// when requested). Throws Error carrying the id.
PhoneSequence UtterancePhones(const Utterance& utt,
                              const ExampleOptions& options);

std::array<TaskExample, 4> BuildExamples(const Utterance& utt,
                                         const ExampleOptions& options = {});

std::string ExampleToJson(const TaskExample& example);

// Vocabulary.

struct VocabularyOptions {
  // Timestamp tokens are reserved but never emitted in examples.
  // "<0.00>" ... "<20.00>" in steps of 0.02 s, stored in centiseconds.
  int timestamp_max_cs = 2000;
  int timestamp_step_cs = 2;
};

struct Vocabulary {
  std::vector<std::string> specials;
  std::vector<std::string> phones;       // slash-wrapped, sorted
  std::vector<std::string> subwords;     // as supplied, duplicates removed
  std::vector<std::string> encoder_ctc;  // "<blank>" first, then sorted

  void Write(std::ostream& out) const;
  static Vocabulary Read(std::istream& in);
  std::size_t size() const {
    return specials.size() + phones.size() + subwords.size();
  }
};

inline constexpr std::string_view kBlankToken = "<blank>";
inline constexpr std::string_view kUnknownToken = "<oov>";
inline constexpr std::string_view kStartToken = "<sos>";
inline constexpr std::string_view kEndToken = "<eos>";

// Incremental builder: feed every kept utterance, then Finish().
class VocabularyBuilder {
 public:
  explicit VocabularyBuilder(ExampleOptions examples = {},
                             VocabularyOptions options = {})
      : examples_(examples), options_(options) {}

  void Add(const Utterance& utt);
  void AddPhones(const PhoneSequence& phones, std::string_view lang);

  // Throws Error on an empty phone inventory or on phone/subword collisions.
  Vocabulary Finish(const std::vector<std::string>& subwords) const;

 private:
  ExampleOptions examples_;
  VocabularyOptions options_;
  std::set<std::string> phones_;
  std::set<std::string> stripped_;
  std::set<std::string> langs_;
};

}  // namespace phonekit
