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

#include "phonekit/multitask.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "phonekit/error.h"
#include "phonekit/unicode.h"

namespace phonekit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const MarkClassTable& MarksOrDefault(const MarkClassTable* marks) {
  return marks ? *marks : MarkClassTable::Default();
}

std::string RequiredString(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    throw Error(std::string("missing required field '") + field + "'");
  }
  if (!it->is_string()) {
    throw Error(std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

std::string FormatHours(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", seconds / 3600.0);
  return buf;
}

std::string TimestampToken(int centiseconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "<%d.%02d>", centiseconds / 100,
                centiseconds % 100);
  return buf;
}

}  // namespace

bool IsValidLanguageCode(std::string_view lang) {
  if (lang == "unk") return true;
  return lang.size() == 3 && std::all_of(lang.begin(), lang.end(), [](char c) {
           return c >= 'a' && c <= 'z';
         });
}

Utterance ParseUtterance(std::string_view json_line) {
  const json j = json::parse(json_line);
  if (!j.is_object()) throw Error("record is not a JSON object");
  Utterance u;
  u.id = RequiredString(j, "id");
  u.lang = RequiredString(j, "lang");
  u.text = RequiredString(j, "text");
  u.ipa = RequiredString(j, "ipa");
  if (u.id.empty()) throw Error("field 'id' is empty");
  if (!IsValidLanguageCode(u.lang)) {
    throw Error("field 'lang' must be three lowercase letters or 'unk', got '" +
                u.lang + "'");
  }
  if (auto it = j.find("duration_s"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw Error("field 'duration_s' must be a number");
    u.duration_s = it->get<double>();
  }
  if (auto it = j.find("audio"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("field 'audio' must be a string");
    u.audio = it->get<std::string>();
  }
  return u;
}

std::optional<std::variant<Utterance, RecordError>> CorpusReader::Next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      return ParseUtterance(line);
    } catch (const json::exception& e) {
      return RecordError{line_, std::string("malformed JSON: ") + e.what()};
    } catch (const Error& e) {
      return RecordError{line_, e.what()};
    }
  }
  return std::nullopt;
}

// Filtering.

std::optional<std::string> UtteranceFilter::Check(const Utterance& utt) {
  ++report_.seen;
  auto drop = [&](std::string_view reason) -> std::optional<std::string> {
    ++report_.dropped[std::string(reason)];
    report_.drops.emplace_back(utt.id, std::string(reason));
    return std::string(reason);
  };

  if (options_.lang_blocklist.contains(utt.lang)) {
    return drop(kDropLangBlocklist);
  }
  if (utt.duration_s) {
    if (options_.min_duration_s && *utt.duration_s < *options_.min_duration_s) {
      return drop(kDropMinDuration);
    }
    if (options_.max_duration_s && *utt.duration_s > *options_.max_duration_s) {
      return drop(kDropMaxDuration);
    }
  }
  std::size_t phones = 0;
  try {
    phones = Tokenize(utt.ipa, MarksOrDefault(options_.marks)).phone_count();
  } catch (const Error&) {
    return drop(kDropUntokenizable);
  }
  if (phones > options_.max_phones) return drop(kDropMaxPhones);

  ++report_.kept;
  LanguageRetention& r = report_.retained[utt.lang];
  ++r.utterances;
  if (utt.duration_s) r.seconds += *utt.duration_s;
  return std::nullopt;
}

void DropReport::WriteTsv(std::ostream& out) const {
  out << "# summary\nseen\t" << seen << "\nkept\t" << kept << '\n';
  out << "# dropped\nreason\tcount\n";
  for (std::string_view reason : {kDropLangBlocklist, kDropMaxDuration,
                                  kDropMaxPhones, kDropMinDuration,
                                  kDropUntokenizable}) {
    const auto it = dropped.find(std::string(reason));
    out << reason << '\t' << (it == dropped.end() ? 0 : it->second) << '\n';
  }
  out << "# retained\nlang\tutterances\thours\n";
  for (const auto& [lang, r] : retained) {
    out << lang << '\t' << r.utterances << '\t' << FormatHours(r.seconds)
        << '\n';
  }
  out << "# drops\nid\treason\n";
  for (const auto& [id, reason] : drops) out << id << '\t' << reason << '\n';
}

std::vector<std::string> LanguagesAboveHours(const DropReport& report,
                                             double max_hours) {
  std::vector<std::string> out;
  for (const auto& [lang, r] : report.retained) {
    if (r.seconds / 3600.0 > max_hours) out.push_back(lang);
  }
  return out;
}

// Graphemes.

GraphemeTokenizer::GraphemeTokenizer(const std::vector<std::string>& subwords) {
  for (const std::string& s : subwords) {
    std::u32string piece = DecodeUtf8(s);
    if (piece.empty()) continue;
    longest_ = std::max(longest_, piece.size());
    pieces_.insert(std::move(piece));
  }
}

std::vector<std::string> GraphemeTokenizer::Tokenize(
    std::string_view text) const {
  const std::u32string marker = DecodeUtf8(kWordMarker);
  std::u32string s = marker;
  for (char32_t c : DecodeUtf8(text)) {
    if (c == U' ') {
      s += marker;
    } else {
      s.push_back(c);
    }
  }
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len = std::min(longest_, s.size() - i);
    for (; len > 1; --len) {
      if (pieces_.contains(s.substr(i, len))) break;
    }
    out.push_back(EncodeUtf8(std::u32string_view(s).substr(i, len)));
    i += len;
  }
  return out;
}

std::string GraphemeTokenizer::Detokenize(
    const std::vector<std::string>& pieces) {
  std::string joined;
  for (const std::string& p : pieces) joined += p;
  std::string out;
  std::size_t pos = 0;
  while (pos < joined.size()) {
    if (joined.compare(pos, kWordMarker.size(), kWordMarker) == 0) {
      out += ' ';
      pos += kWordMarker.size();
    } else {
      out += joined[pos++];
    }
  }
  if (!out.empty() && out.front() == ' ') out.erase(0, 1);
  return out;
}

// Examples.

std::string_view TaskToken(Task task) {
  switch (task) {
    case Task::kPr:
      return "<pr>";
    case Task::kAsr:
      return "<asr>";
    case Task::kG2p:
      return "<g2p>";
    case Task::kP2g:
      return "<p2g>";
  }
  return "<pr>";
}

std::string_view TaskName(Task task) {
  const std::string_view token = TaskToken(task);
  return token.substr(1, token.size() - 2);
}

std::string LanguageToken(std::string_view lang) {
  return "<" + std::string(lang) + ">";
}

PhoneSequence UtterancePhones(const Utterance& utt,
                              const ExampleOptions& options) {
  PhoneSequence phones;
  try {
    phones = Tokenize(utt.ipa, MarksOrDefault(options.marks));
  } catch (const Error& e) {
    throw Error("utterance '" + utt.id + "': " + e.what());
  }
  if (options.refine_english && utt.lang == "eng") {
    phones = RefineEnglish(phones, options.refine);
  }
  return phones;
}

std::array<TaskExample, 4> BuildExamples(const Utterance& utt,
                                         const ExampleOptions& options) {
  const PhoneSequence phones = UtterancePhones(utt, options);
  const std::vector<std::string> phone_tokens = SlashTokens(phones);
  const std::vector<std::string> ctc_tokens = SlashTokens(StripSuprasegmentals(
      phones, MarksOrDefault(options.marks), options.strip));
  const GraphemeTokenizer fallback;
  const std::vector<std::string> graphemes =
      (options.graphemes ? *options.graphemes : fallback).Tokenize(utt.text);
  const std::vector<std::string> none{std::string(kNoPromptToken)};

  auto make = [&](Task task, const std::vector<std::string>& prompt,
                  const std::vector<std::string>& target) {
    TaskExample e;
    e.task = task;
    e.utterance_id = utt.id;
    e.lang_token = LanguageToken(utt.lang);
    e.prompt = prompt;
    e.target = target;
    e.ctc_target = ctc_tokens;
    e.audio = utt.audio;
    return e;
  };
  return {make(Task::kPr, none, phone_tokens),
          make(Task::kAsr, none, graphemes),
          make(Task::kG2p, graphemes, phone_tokens),
          make(Task::kP2g, phone_tokens, graphemes)};
}

std::string ExampleToJson(const TaskExample& example) {
  ordered_json j;
  j["utt_id"] = example.utterance_id;
  j["task"] = std::string(TaskName(example.task));
  j["task_token"] = std::string(TaskToken(example.task));
  j["lang_token"] = example.lang_token;
  j["prompt"] = example.prompt;
  j["target"] = example.target;
  j["ctc_target"] = example.ctc_target;
  if (example.audio) j["audio"] = *example.audio;
  return j.dump();
}

// Vocabulary.

void VocabularyBuilder::Add(const Utterance& utt) {
  AddPhones(UtterancePhones(utt, examples_), utt.lang);
}

void VocabularyBuilder::AddPhones(const PhoneSequence& phones,
                                  std::string_view lang) {
  for (const std::string& t : SlashTokens(phones)) phones_.insert(t);
  const PhoneSequence stripped = StripSuprasegmentals(
      phones, MarksOrDefault(examples_.marks), examples_.strip);
  for (const std::string& t : SlashTokens(stripped)) stripped_.insert(t);
  langs_.insert(std::string(lang));
}

Vocabulary VocabularyBuilder::Finish(
    const std::vector<std::string>& subwords) const {
  if (phones_.empty()) throw Error("empty phone inventory");

  Vocabulary v;
  v.specials = {std::string(kBlankToken), std::string(kUnknownToken),
                std::string(kStartToken), std::string(kEndToken),
                std::string(kNoPromptToken)};
  for (Task t : {Task::kPr, Task::kAsr, Task::kG2p, Task::kP2g}) {
    v.specials.emplace_back(TaskToken(t));
  }
  v.specials.emplace_back("<notimestamps>");
  std::set<std::string> langs = langs_;
  langs.insert("unk");
  for (const std::string& lang : langs) v.specials.push_back(LanguageToken(lang));
  for (int cs = 0; cs <= options_.timestamp_max_cs;
       cs += std::max(1, options_.timestamp_step_cs)) {
    v.specials.push_back(TimestampToken(cs));
  }

  v.phones.assign(phones_.begin(), phones_.end());

  std::set<std::string> taken(v.specials.begin(), v.specials.end());
  taken.insert(phones_.begin(), phones_.end());
  std::set<std::string> seen;
  std::vector<std::string> collisions;
  for (const std::string& s : subwords) {
    if (s.empty() || !seen.insert(s).second) continue;
    if (taken.contains(s)) {
      collisions.push_back(s);
      continue;
    }
    v.subwords.push_back(s);
  }
  if (!collisions.empty()) {
    std::string list;
    for (const std::string& c : collisions) list += (list.empty() ? "" : ", ") + c;
    throw Error("subwords collide with phone or special tokens: " + list);
  }

  v.encoder_ctc.push_back(std::string(kBlankToken));
  v.encoder_ctc.insert(v.encoder_ctc.end(), stripped_.begin(), stripped_.end());
  return v;
}

void Vocabulary::Write(std::ostream& out) const {
  auto section = [&](const char* name, const std::vector<std::string>& items) {
    out << "# " << name << '\n';
    for (const std::string& s : items) out << s << '\n';
  };
  section("specials", specials);
  section("phones", phones);
  section("subwords", subwords);
  section("encoder_ctc", encoder_ctc);
}

Vocabulary Vocabulary::Read(std::istream& in) {
  Vocabulary v;
  std::vector<std::string>* current = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "# specials") {
      current = &v.specials;
    } else if (line == "# phones") {
      current = &v.phones;
    } else if (line == "# subwords") {
      current = &v.subwords;
    } else if (line == "# encoder_ctc") {
      current = &v.encoder_ctc;
    } else if (!current) {
      throw Error("vocabulary line " + std::to_string(line_no) +
                  ": token before any section header");
    } else {
      current->push_back(line);
    }
  }
  return v;
}

}  // namespace phonekit
