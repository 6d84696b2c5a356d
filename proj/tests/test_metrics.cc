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


#include <algorithm>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.h"
#include "phonekit/edit_distance.h"
#include "phonekit/error.h"
#include "phonekit/metrics.h"

namespace phonekit {
namespace {

using testing::BruteEditDistance;

PhoneSequence Seq(std::string_view ipa) { return Tokenize(ipa); }

PhoneSequence FromTokens(const std::vector<PhoneToken>& tokens) {
  PhoneSequence s;
  s.tokens = tokens;
  return s;
}

const std::vector<PhoneToken>& Alphabet() {
  static const std::vector<PhoneToken> a{
      PhoneToken(U'p'), PhoneToken(U'b'), PhoneToken(U'a'),
      PhoneToken::FromSurface("pʰ")};
  return a;
}

std::vector<PhoneToken> RandomPhones(std::mt19937_64& rng, std::size_t alpha) {
  std::uniform_int_distribution<std::size_t> len(0, 5);
  std::uniform_int_distribution<std::size_t> pick(0, alpha - 1);
  std::vector<PhoneToken> out(len(rng));
  for (auto& t : out) t = Alphabet()[pick(rng)];
  return out;
}

Rational Unit(const std::string& a, const std::string& b) {
  return a == b ? Rational(0) : Rational(1);
}

TEST_SUITE("metrics") {

TEST_CASE("edit distance basics") {
  const std::vector<int> a{1, 2, 3};
  const std::vector<int> empty;
  auto unit = [](int x, int y) { return x == y ? Rational(0) : Rational(1); };
  const AlignmentResult same = WeightedEditDistance<int, int>(
      a, a, unit, Rational(1), Rational(1));
  CHECK(same.cost.numerator() == 0);
  REQUIRE(same.ops.size() == 3);
  for (const EditOp& op : same.ops) CHECK(op.kind == EditKind::kMatch);

  const AlignmentResult del = WeightedEditDistance<int, int>(
      empty, a, unit, Rational(1), Rational(1));
  CHECK(del.cost == Rational(3));
  for (const EditOp& op : del.ops) {
    CHECK(op.kind == EditKind::kDelete);
    CHECK(op.hyp_index == -1);
  }
  const AlignmentResult ins = WeightedEditDistance<int, int>(
      a, empty, unit, Rational(1), Rational(1));
  CHECK(ins.cost == Rational(3));
  CHECK(ins.ops.front().kind == EditKind::kInsert);
}

TEST_CASE("edit distance matches the brute-force oracle") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> sym(0, 3);
  std::uniform_int_distribution<std::size_t> len(0, 5);
  const std::function<Rational(const int&, const int&)> subst =
      [](const int& x, const int& y) {
        return Rational(std::abs(x - y), 3);
      };
  for (int iter = 0; iter < 400; ++iter) {
    std::vector<int> h(len(rng));
    std::vector<int> r(len(rng));
    for (int& x : h) x = sym(rng);
    for (int& x : r) x = sym(rng);
    const AlignmentResult got = WeightedEditDistance<int, int>(
        h, r, subst, Rational(1), Rational(1));
    CHECK(got.cost == BruteEditDistance<int, int>(h, r, subst, Rational(1),
                                                  Rational(1)));
    // The script reproduces the cost and covers both sequences in order.
    Rational sum;
    std::ptrdiff_t hi = 0;
    std::ptrdiff_t ri = 0;
    for (const EditOp& op : got.ops) {
      sum += op.cost;
      if (op.kind != EditKind::kDelete) CHECK(op.hyp_index == hi++);
      if (op.kind != EditKind::kInsert) CHECK(op.ref_index == ri++);
    }
    CHECK(sum == got.cost);
    CHECK(hi == static_cast<std::ptrdiff_t>(h.size()));
    CHECK(ri == static_cast<std::ptrdiff_t>(r.size()));
  }
}

TEST_CASE("tie-break prefers substitution, then deletion") {
  auto unit = [](char x, char y) { return x == y ? Rational(0) : Rational(1); };
  const std::string h = "ab";
  const std::string r = "ba";
  const AlignmentResult res = WeightedEditDistance<char, char>(
      std::span<const char>(h), std::span<const char>(r), unit, Rational(1),
      Rational(1));
  CHECK(res.cost == Rational(2));
  REQUIRE(res.ops.size() == 2);
  CHECK(res.ops[0].kind == EditKind::kSubstitute);
  CHECK(res.ops[1].kind == EditKind::kSubstitute);
}

TEST_CASE("pfer goldens") {
  const FeatureTable& t = FeatureTable::Fixture();
  CHECK(Pfer(Seq("pʰɔsəm"), Seq("pʰɔsəm"), t).numerator() == 0);
  CHECK(Pfer(Seq("p"), Seq("b"), t) == Rational(1, 24));
  CHECK(ToDecimal(Pfer(Seq("p"), Seq("b"), t), 4) == "0.0417");
  CHECK(Pfer(Seq(""), Seq("pɔs"), t) == Rational(1));
  CHECK_THROWS_AS(Pfer(Seq("p"), Seq(""), t), Error);
  CHECK_THROWS_AS(Pfer(Seq("ʘ"), Seq("p"), t), UnknownPhoneError);
  CHECK(Pfer(Seq("pʲ"), Seq("p"), t, LookupFallback::kStripMarks)
            .numerator() == 0);
  const UtteranceScore s =
      ScorePfer(Seq("pʲa"), Seq("pa"), t, LookupFallback::kStripMarks);
  CHECK(s.degraded_lookups == 1);
  CHECK(s.ref_units == 2);
}

TEST_CASE("per goldens") {
  CHECK(Per(Seq("pʰɔsəm"), Seq("pʰɔsəm")).numerator() == 0);
  CHECK(Per(Seq("p"), Seq("b")) == Rational(1));
  CHECK(Per(Seq("p"), Seq("pʰ")) == Rational(1));
  CHECK(Per(Seq(""), Seq("abc")) == Rational(1));
  CHECK_THROWS_AS(Per(Seq("p"), Seq("")), Error);
  // Boundaries do not count as units.
  CHECK(Per(Seq("pa ta"), Seq("pata")).numerator() == 0);
}

TEST_CASE("pter goldens") {
  CHECK(Pter(Seq("pʰ"), Seq("pʰ")).numerator() == 0);
  CHECK(Pter(Seq("p"), Seq("pʰ")) == Rational(1, 2));
  CHECK(Pter(Seq("pʰ"), Seq("p")) == Rational(1));
  CHECK(Pter(Seq(""), Seq("pʰa")) == Rational(1));
  CHECK_THROWS_AS(Pter(Seq("p"), Seq("")), Error);
}

TEST_CASE("wer and cer goldens") {
  CHECK(Wer(SplitWords("the cat"), SplitWords("the cat")).numerator() == 0);
  CHECK(Wer(SplitWords("a b c"), SplitWords("a")) == Rational(2));
  CHECK(Wer({}, SplitWords("x y")) == Rational(1));
  CHECK_THROWS_AS(Wer(SplitWords("a"), {}), Error);
  CHECK(SplitWords("  a\tb  c ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(ScoringCharacters("a b\tc") == U"abc");
  CHECK(Cer(U"abd", U"abc") == Rational(1, 3));
  CHECK_THROWS_AS(Cer(U"a", U""), Error);
}

TEST_CASE("phone metrics match brute-force oracles") {
  const FeatureTable& t = FeatureTable::Fixture();
  const std::function<Rational(const PhoneToken&, const PhoneToken&)> feat =
      [&](const PhoneToken& a, const PhoneToken& b) {
        return PhoneDistance(t.Lookup(a).vector, t.Lookup(b).vector);
      };
  const std::function<Rational(const PhoneToken&, const PhoneToken&)> unit =
      [](const PhoneToken& a, const PhoneToken& b) {
        return a == b ? Rational(0) : Rational(1);
      };
  const std::function<Rational(const std::string&, const std::string&)> sunit =
      Unit;
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int iter = 0; iter < 600; ++iter) {
    const auto h = RandomPhones(rng, 4);
    const auto r = RandomPhones(rng, 4);
    if (r.empty()) continue;
    const auto n = static_cast<std::int64_t>(r.size());
    const PhoneSequence hs = FromTokens(h);
    const PhoneSequence rs = FromTokens(r);
    CHECK(Pfer(hs, rs, t) * n ==
          BruteEditDistance<PhoneToken, PhoneToken>(h, r, feat, Rational(1),
                                                    Rational(1)));
    CHECK(Per(hs, rs) * n ==
          BruteEditDistance<PhoneToken, PhoneToken>(h, r, unit, Rational(1),
                                                    Rational(1)));
    const auto hp = PterTokens(hs);
    const auto rp = PterTokens(rs);
    CHECK(Pter(hs, rs) * static_cast<std::int64_t>(rp.size()) ==
          BruteEditDistance<std::string, std::string>(hp, rp, sunit,
                                                      Rational(1), Rational(1)));
    // Symmetry and bound.
    if (!h.empty()) {
      CHECK(Pfer(hs, rs, t) * n ==
            Pfer(rs, hs, t) * static_cast<std::int64_t>(h.size()));
    }
    CHECK(Pfer(hs, rs, t) <=
          Rational(static_cast<std::int64_t>(std::max(h.size(), r.size())), n));
    // One extra phone changes the distance by at most 1.
    auto longer = h;
    longer.push_back(Alphabet()[0]);
    const Rational d0 = Pfer(hs, rs, t) * n;
    const Rational d1 = Pfer(FromTokens(longer), rs, t) * n;
    CHECK(d1 - d0 <= Rational(1));
    CHECK(d0 - d1 <= Rational(1));
    ++checked;
  }
  CHECK(checked > 400);
}

TEST_CASE("substitution costs are multiples of 1/24") {
  const FeatureTable& t = FeatureTable::Fixture();
  std::mt19937_64 rng(5);
  std::vector<PhoneToken> inventory;
  for (const auto& [k, v] : t.entries()) {
    inventory.push_back(PhoneToken::FromSurface(k));
  }
  std::uniform_int_distribution<std::size_t> pick(0, inventory.size() - 1);
  std::uniform_int_distribution<std::size_t> len(1, 5);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<PhoneToken> h(len(rng));
    std::vector<PhoneToken> r(len(rng));
    for (auto& x : h) x = inventory[pick(rng)];
    for (auto& x : r) x = inventory[pick(rng)];
    const AlignmentResult a = AlignFeatures(FromTokens(h), FromTokens(r), t);
    for (const EditOp& op : a.ops) {
      CHECK(24 % op.cost.denominator() == 0);
      if (op.kind == EditKind::kInsert || op.kind == EditKind::kDelete) {
        CHECK(op.cost == Rational(1));
      }
    }
  }
}

TEST_CASE("wer matches the oracle") {
  const std::function<Rational(const std::string&, const std::string&)> sunit =
      Unit;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> sym(0, 3);
  std::uniform_int_distribution<std::size_t> len(1, 5);
  const std::vector<std::string> words{"a", "bb", "c", "dd"};
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::string> h(len(rng) - 1);
    std::vector<std::string> r(len(rng));
    for (auto& w : h) w = words[sym(rng)];
    for (auto& w : r) w = words[sym(rng)];
    CHECK(Wer(h, r) * static_cast<std::int64_t>(r.size()) ==
          BruteEditDistance<std::string, std::string>(h, r, sunit, Rational(1),
                                                      Rational(1)));
  }
}

TEST_CASE("metric names") {
  for (Metric m : {Metric::kPfer, Metric::kPer, Metric::kPter, Metric::kWer,
                   Metric::kCer}) {
    CHECK(ParseMetric(MetricName(m)) == m);
  }
  CHECK_FALSE(ParseMetric("bleu").has_value());
}

std::vector<ScorePair> TwoPairs() {
  return {{"u2", "eng", "bik", "pa"}, {"u1", "deu", "ba", "pa"}};
}

TEST_CASE("corpus aggregation") {
  CorpusOptions o;
  o.metric = Metric::kPer;
  const CorpusScore s = ScoreCorpus(TwoPairs(), o);
  CHECK(s.total_distance == Rational(4));
  CHECK(s.total_ref_units == 4);
  CHECK(s.Score() == Rational(1));
  CHECK(s.Score(true) == Rational(1));
  REQUIRE(s.per_utterance.size() == 2);
  CHECK(s.per_utterance[0].id == "u1");
  CHECK(CorpusScore::Score(s.per_language.at("eng"), false) == Rational(3, 2));
  CHECK(CorpusScore::Score(s.per_language.at("deu"), false) == Rational(1, 2));

  const CorpusScore single = ScoreCorpus({TwoPairs()[1]}, o);
  CHECK(single.Score() == Per(Seq("ba"), Seq("pa")));
}

TEST_CASE("micro and macro differ when reference lengths differ") {
  CorpusOptions o;
  o.metric = Metric::kPer;
  const CorpusScore s =
      ScoreCorpus({{"a", "x", "b", "p"}, {"b", "x", "pata", "pata"}}, o);
  CHECK(s.Score() == Rational(1, 5));
  CHECK(s.Score(true) == Rational(1, 2));
}

TEST_CASE("corpus scoring is order and job independent") {
  const FeatureTable& t = FeatureTable::Fixture();
  std::mt19937_64 rng(99);
  std::vector<ScorePair> pairs;
  const char* phones[] = {"p", "b", "a", "pʰ", "m", "ə"};
  std::uniform_int_distribution<int> pick(0, 5);
  std::uniform_int_distribution<int> len(1, 6);
  for (int i = 0; i < 60; ++i) {
    ScorePair p;
    p.id = "utt" + std::to_string(i);
    p.lang = i % 3 == 0 ? "eng" : "fra";
    for (int k = len(rng); k > 0; --k) p.hyp += phones[pick(rng)];
    for (int k = len(rng); k > 0; --k) p.ref += phones[pick(rng)];
    pairs.push_back(p);
  }
  pairs.push_back({"broken", "eng", "p", ""});
  CorpusOptions o;
  o.table = &t;
  const CorpusScore base = ScoreCorpus(pairs, o);
  CHECK(base.failures.size() == 1);
  CHECK(base.failures[0].id == "broken");
  std::ostringstream base_tsv;
  WriteTsvReport(base, base_tsv);
  for (unsigned jobs : {1u, 3u, 8u}) {
    auto shuffled = pairs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CorpusOptions oj = o;
    oj.jobs = jobs;
    const CorpusScore s = ScoreCorpus(shuffled, oj);
    CHECK(s.total_distance == base.total_distance);
    CHECK(s.total_ref_units == base.total_ref_units);
    std::ostringstream tsv;
    WriteTsvReport(s, tsv);
    CHECK(tsv.str() == base_tsv.str());
  }
}

TEST_CASE("duplicate ids are an error") {
  CorpusOptions o;
  o.metric = Metric::kPer;
  CHECK_THROWS_AS(ScoreCorpus({{"a", "x", "p", "p"}, {"a", "x", "b", "b"}}, o),
                  Error);
}

TEST_CASE("reports") {
  CorpusOptions o;
  o.metric = Metric::kPer;
  const CorpusScore s = ScoreCorpus(TwoPairs(), o);
  std::ostringstream tsv;
  WriteTsvReport(s, tsv);
  CHECK(tsv.str().starts_with("id\tlang\tmetric\tdistance\tref_units\tscore\n"
                              "u1\tdeu\tper\t1.000000\t2\t0.500000\n"));
  CHECK(tsv.str().find("#corpus\tall\tper\t4.000000\t4\t1.000000\n") !=
        std::string::npos);
  std::ostringstream json;
  WriteJsonReport(s, json, {.macro = false, .digits = 3});
  const auto j = nlohmann::json::parse(json.str());
  CHECK(j["aggregation"] == "micro");
  CHECK(j["metric"] == "per");
}

}  // TEST_SUITE

}  // namespace
}  // namespace phonekit
