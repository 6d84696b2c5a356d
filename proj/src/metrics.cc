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

#include "phonekit/metrics.h"

#include <algorithm>
#include <ostream>
#include <set>
#include <thread>

#include "json.hpp"
#include "phonekit/error.h"
#include "phonekit/unicode.h"

namespace phonekit {

namespace {

UtteranceScore FromAlignment(const AlignmentResult& a, std::size_t ref_units) {
  UtteranceScore s;
  s.distance = a.cost;
  s.ref_units = static_cast<std::int64_t>(ref_units);
  return s;
}

std::vector<FeatureVector> LookupAll(const PhoneSequence& seq,
                                     const FeatureTable& table,
                                     LookupFallback fallback,
                                     std::size_t* degraded) {
  std::vector<FeatureVector> out;
  out.reserve(seq.tokens.size());
  for (const PhoneToken& t : seq.tokens) {
    LookupResult r = table.Lookup(t, fallback);
    if (r.degraded && degraded) ++*degraded;
    out.push_back(std::move(r.vector));
  }
  return out;
}

}  // namespace

const char* EditKindName(EditKind kind) {
  switch (kind) {
    case EditKind::kMatch:
      return "match";
    case EditKind::kSubstitute:
      return "substitute";
    case EditKind::kDelete:
      return "delete";
    case EditKind::kInsert:
      return "insert";
  }
  return "?";
}

std::string_view MetricName(Metric metric) {
  switch (metric) {
    case Metric::kPfer:
      return "pfer";
    case Metric::kPer:
      return "per";
    case Metric::kPter:
      return "pter";
    case Metric::kWer:
      return "wer";
    case Metric::kCer:
      return "cer";
  }
  return "?";
}

std::optional<Metric> ParseMetric(std::string_view name) {
  for (Metric m : {Metric::kPfer, Metric::kPer, Metric::kPter, Metric::kWer,
                   Metric::kCer}) {
    if (MetricName(m) == name) return m;
  }
  return std::nullopt;
}

Rational UtteranceScore::Rate() const {
  if (ref_units <= 0) throw Error("empty reference");
  return distance / Rational(ref_units);
}

AlignmentResult AlignFeatures(const PhoneSequence& hyp,
                              const PhoneSequence& ref,
                              const FeatureTable& table,
                              LookupFallback fallback,
                              std::size_t* degraded_lookups) {
  const auto hyp_vecs = LookupAll(hyp, table, fallback, degraded_lookups);
  const auto ref_vecs = LookupAll(ref, table, fallback, degraded_lookups);
  return WeightedEditDistance<FeatureVector, FeatureVector>(
      hyp_vecs, ref_vecs, PhoneDistance, Rational(1), Rational(1));
}

UtteranceScore ScorePfer(const PhoneSequence& hyp, const PhoneSequence& ref,
                         const FeatureTable& table, LookupFallback fallback) {
  std::size_t degraded = 0;
  UtteranceScore s = FromAlignment(
      AlignFeatures(hyp, ref, table, fallback, &degraded), ref.phone_count());
  s.degraded_lookups = degraded;
  return s;
}

UtteranceScore ScorePer(const PhoneSequence& hyp, const PhoneSequence& ref) {
  return FromAlignment(
      UnitEditDistance<PhoneToken>(hyp.tokens, ref.tokens), ref.phone_count());
}

UtteranceScore ScorePter(const PhoneSequence& hyp, const PhoneSequence& ref) {
  const auto h = PterTokens(hyp);
  const auto r = PterTokens(ref);
  return FromAlignment(UnitEditDistance<std::string>(h, r), r.size());
}

UtteranceScore ScoreWer(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref) {
  return FromAlignment(UnitEditDistance<std::string>(hyp, ref), ref.size());
}

UtteranceScore ScoreCer(std::u32string_view hyp, std::u32string_view ref) {
  return FromAlignment(
      UnitEditDistance<char32_t>(std::span(hyp.data(), hyp.size()),
                                 std::span(ref.data(), ref.size())),
      ref.size());
}

Rational Pfer(const PhoneSequence& hyp, const PhoneSequence& ref,
              const FeatureTable& table, LookupFallback fallback) {
  if (ref.phone_count() == 0) throw Error("empty reference");
  return ScorePfer(hyp, ref, table, fallback).Rate();
}

Rational Per(const PhoneSequence& hyp, const PhoneSequence& ref) {
  return ScorePer(hyp, ref).Rate();
}

Rational Pter(const PhoneSequence& hyp, const PhoneSequence& ref) {
  return ScorePter(hyp, ref).Rate();
}

Rational Wer(const std::vector<std::string>& hyp,
             const std::vector<std::string>& ref) {
  return ScoreWer(hyp, ref).Rate();
}

Rational Cer(std::u32string_view hyp, std::u32string_view ref) {
  return ScoreCer(hyp, ref).Rate();
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::u32string current;
  for (char32_t c : DecodeUtf8(text)) {
    if (IsWhitespace(c)) {
      if (!current.empty()) words.push_back(EncodeUtf8(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(EncodeUtf8(current));
  return words;
}

std::u32string ScoringCharacters(std::string_view text) {
  std::u32string out;
  for (char32_t c : DecodeUtf8(text)) {
    if (!IsWhitespace(c)) out.push_back(c);
  }
  return out;
}

UtteranceScore ScoreOne(const ScorePair& pair, const CorpusOptions& options) {
  const MarkClassTable& marks =
      options.marks ? *options.marks : MarkClassTable::Default();
  UtteranceScore score;
  switch (options.metric) {
    case Metric::kWer:
      score = ScoreWer(SplitWords(pair.hyp), SplitWords(pair.ref));
      break;
    case Metric::kCer:
      score = ScoreCer(ScoringCharacters(pair.hyp), ScoringCharacters(pair.ref));
      break;
    case Metric::kPfer:
    case Metric::kPer:
    case Metric::kPter: {
      TokenizeOptions hyp_opts;
      hyp_opts.lenient = options.lenient_hypotheses;
      const PhoneSequence ref = Tokenize(pair.ref, marks);
      const PhoneSequence hyp = Tokenize(pair.hyp, marks, hyp_opts);
      if (options.metric == Metric::kPfer) {
        if (!options.table) throw Error("PFER needs a feature table");
        score = ScorePfer(hyp, ref, *options.table, options.fallback);
      } else if (options.metric == Metric::kPer) {
        score = ScorePer(hyp, ref);
      } else {
        score = ScorePter(hyp, ref);
      }
      break;
    }
  }
  if (score.ref_units == 0) throw Error("empty reference");
  return score;
}

CorpusScore ScoreCorpus(const std::vector<ScorePair>& pairs,
                        const CorpusOptions& options) {
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pairs[a].id < pairs[b].id;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (pairs[order[k]].id == pairs[order[k - 1]].id) {
      throw Error("duplicate utterance id '" + pairs[order[k]].id + "'");
    }
  }

  struct Outcome {
    std::optional<UtteranceScore> score;
    std::string error;
  };
  std::vector<Outcome> outcomes(pairs.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < order.size(); k += stride) {
      const ScorePair& pair = pairs[order[k]];
      try {
        outcomes[k].score = ScoreOne(pair, options);
      } catch (const std::exception& e) {
        outcomes[k].error = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1 || order.size() < 2) {
    work(0, 1);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w) workers.emplace_back(work, w, jobs);
  }

  // Reduction in id order.
  CorpusScore result;
  result.metric = options.metric;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const ScorePair& pair = pairs[order[k]];
    if (!outcomes[k].score) {
      result.failures.push_back({pair.id, outcomes[k].error});
      continue;
    }
    const UtteranceScore& s = *outcomes[k].score;
    result.total_distance += s.distance;
    result.total_ref_units += s.ref_units;
    result.rate_sum += s.Rate();
    LanguageTotals& lang = result.per_language[pair.lang];
    lang.distance += s.distance;
    lang.ref_units += s.ref_units;
    lang.utterances += 1;
    lang.rate_sum += s.Rate();
    result.per_utterance.push_back({pair.id, pair.lang, s});
  }
  return result;
}

Rational CorpusScore::Score(const LanguageTotals& totals, bool macro) {
  if (macro) {
    if (totals.utterances == 0) throw Error("no scored utterances");
    return totals.rate_sum /
           Rational(static_cast<std::int64_t>(totals.utterances));
  }
  if (totals.ref_units == 0) throw Error("no reference units");
  return totals.distance / Rational(totals.ref_units);
}

Rational CorpusScore::Score(bool macro) const {
  LanguageTotals all;
  all.distance = total_distance;
  all.ref_units = total_ref_units;
  all.utterances = per_utterance.size();
  all.rate_sum = rate_sum;
  return Score(all, macro);
}

void WriteTsvReport(const CorpusScore& score, std::ostream& out,
                    const ReportOptions& options) {
  const std::string metric(MetricName(score.metric));
  const int d = options.digits;
  out << "id\tlang\tmetric\tdistance\tref_units\tscore\n";
  for (const UtteranceRow& row : score.per_utterance) {
    out << row.id << '\t' << row.lang << '\t' << metric << '\t'
        << ToDecimal(row.score.distance, d) << '\t' << row.score.ref_units
        << '\t' << ToDecimal(row.score.Rate(), d) << '\n';
  }
  out << "#corpus\tall\t" << metric << '\t' << ToDecimal(score.total_distance, d)
      << '\t' << score.total_ref_units << '\t'
      << (score.per_utterance.empty()
              ? std::string("nan")
              : ToDecimal(score.Score(options.macro), d))
      << '\n';

  // Per-language table: one row, languages as columns.
  out << "#per_language\tmetric";
  for (const auto& [lang, totals] : score.per_language) out << '\t' << lang;
  out << '\n';
  out << "#per_language\t" << metric;
  for (const auto& [lang, totals] : score.per_language) {
    out << '\t' << ToDecimal(CorpusScore::Score(totals, options.macro), d);
  }
  out << '\n';
  for (const PairFailure& f : score.failures) {
    out << "#failure\t" << f.id << '\t' << f.message << '\n';
  }
}

void WriteJsonReport(const CorpusScore& score, std::ostream& out,
                     const ReportOptions& options) {
  using nlohmann::ordered_json;
  const int d = options.digits;
  ordered_json j;
  j["metric"] = std::string(MetricName(score.metric));
  j["aggregation"] = options.macro ? "macro" : "micro";
  ordered_json corpus;
  corpus["distance"] = ToDecimal(score.total_distance, d);
  corpus["distance_exact"] = ToFraction(score.total_distance);
  corpus["ref_units"] = score.total_ref_units;
  if (!score.per_utterance.empty()) {
    const Rational s = score.Score(options.macro);
    corpus["score"] = ToDecimal(s, d);
    corpus["score_exact"] = ToFraction(s);
  }
  j["corpus"] = corpus;
  ordered_json langs = ordered_json::object();
  for (const auto& [lang, totals] : score.per_language) {
    const Rational s = CorpusScore::Score(totals, options.macro);
    langs[lang] = {{"distance", ToDecimal(totals.distance, d)},
                   {"ref_units", totals.ref_units},
                   {"utterances", totals.utterances},
                   {"score", ToDecimal(s, d)},
                   {"score_exact", ToFraction(s)}};
  }
  j["per_language"] = langs;
  ordered_json rows = ordered_json::array();
  for (const UtteranceRow& row : score.per_utterance) {
    rows.push_back({{"id", row.id},
                    {"lang", row.lang},
                    {"distance", ToDecimal(row.score.distance, d)},
                    {"distance_exact", ToFraction(row.score.distance)},
                    {"ref_units", row.score.ref_units},
                    {"score", ToDecimal(row.score.Rate(), d)},
                    {"score_exact", ToFraction(row.score.Rate())}});
  }
  j["per_utterance"] = rows;
  ordered_json failures = ordered_json::array();
  for (const PairFailure& f : score.failures) {
    failures.push_back({{"id", f.id}, {"error", f.message}});
  }
  j["failures"] = failures;
  out << j.dump(2) << '\n';
}

}  // namespace phonekit
