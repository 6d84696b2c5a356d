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


#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.h"
#include "phonekit/ctc.h"
#include "phonekit/error.h"

namespace phonekit {
namespace {

using testing::AllLabelSequences;
using testing::BrutePrefixMass;
using testing::CtcOutputDistribution;
using testing::RandomLogProbs;
using testing::RelativeError;

LogProbMatrix Uniform(std::size_t frames, std::size_t vocab) {
  return LogProbMatrix(frames, vocab,
                       std::vector<double>(frames * vocab,
                                           -std::log(static_cast<double>(vocab))));
}

std::filesystem::path TempPath(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("phonekit_ctc_" + std::to_string(::getpid()) + "_" + name);
}

TEST_SUITE("ctc_decode") {

TEST_CASE("log-domain helpers") {
  CHECK(LogAdd(kLogZero, kLogZero) == kLogZero);
  CHECK(LogAdd(kLogZero, -1.5) == -1.5);
  CHECK(LogAdd(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(LogAdd(-1000.0, -1000.0) ==
        doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
  const std::vector<double> v{std::log(0.2), std::log(0.3), kLogZero};
  CHECK(LogSumExp(v) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(LogSumExp(std::vector<double>{}) == kLogZero);
}

TEST_CASE("uniform goldens") {
  const std::vector<int> a{1};
  CHECK(CtcForwardLoss(Uniform(1, 2), a) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(CtcForwardLoss(Uniform(2, 2), a) ==
        doctest::Approx(-std::log(0.75)).epsilon(1e-15));
  const LogProbMatrix m = Uniform(2, 2);
  const CtcPrefixScorer s(m);
  CHECK(s.PrefixLogProb(a) == doctest::Approx(std::log(0.75)).epsilon(1e-15));
}

TEST_CASE("forward loss matches path enumeration") {
  std::mt19937_64 rng(1);
  int compared = 0;
  for (int iter = 0; iter < 150; ++iter) {
    const std::size_t frames = 1 + iter % 5;
    const std::size_t vocab = 2 + iter % 3;
    const LogProbMatrix m = RandomLogProbs(rng, frames, vocab);
    const auto dist = CtcOutputDistribution(m);
    for (const auto& y : AllLabelSequences(vocab, 3)) {
      std::size_t needed = y.size();
      for (std::size_t i = 1; i < y.size(); ++i) needed += y[i] == y[i - 1];
      if (needed > frames) {
        CHECK_THROWS_WITH_AS(CtcForwardLoss(m, y),
                             doctest::Contains("target longer"), Error);
        continue;
      }
      const auto it = dist.find(y);
      REQUIRE(it != dist.end());
      const double want = -static_cast<double>(std::log(it->second));
      CHECK(RelativeError(CtcForwardLoss(m, y), want) < 1e-9);
      ++compared;
    }
  }
  CHECK(compared > 1000);
}

TEST_CASE("probability-one alignments score exactly zero") {
  // Frame 0 emits label 1 surely, frame 1 emits blank surely.
  const LogProbMatrix m(2, 2, {kLogZero, 0.0, 0.0, kLogZero});
  const std::vector<int> a{1};
  CHECK(CtcForwardLoss(m, a) == 0.0);
  const std::vector<int> aa{1, 1};
  CHECK_THROWS_AS(CtcForwardLoss(m, aa), Error);
  const CtcPrefixScorer s(m);
  CHECK(s.PrefixLogProb(a) == 0.0);
  CHECK(s.FinalLogProb(s.Extend(s.Initial(), 1)) == 0.0);
  CHECK(s.FinalLogProb(s.Initial()) == kLogZero);
}

TEST_CASE("bad targets") {
  const LogProbMatrix m = Uniform(3, 3);
  const std::vector<int> blank{0};
  const std::vector<int> high{3};
  CHECK_THROWS_AS(CtcForwardLoss(m, blank), Error);
  CHECK_THROWS_AS(CtcForwardLoss(m, high), Error);
  CHECK(CtcForwardLoss(m, std::vector<int>{}) ==
        doctest::Approx(-3 * std::log(1.0 / 3)).epsilon(1e-14));
}

TEST_CASE("prefix scores match enumeration and conserve mass") {
  std::mt19937_64 rng(2);
  for (int iter = 0; iter < 120; ++iter) {
    const std::size_t frames = 1 + iter % 5;
    const std::size_t vocab = 2 + iter % 2;
    const LogProbMatrix m = RandomLogProbs(rng, frames, vocab);
    const auto dist = CtcOutputDistribution(m);
    const CtcPrefixScorer scorer(m);
    for (const auto& y : AllLabelSequences(vocab, frames)) {
      const long double mass = BrutePrefixMass(dist, y);
      const double got = scorer.PrefixLogProb(y);
      if (mass == 0) {
        CHECK(got == kLogZero);
        continue;
      }
      CHECK(RelativeError(std::exp(got), static_cast<double>(mass)) < 1e-9);
      // Incremental extension agrees with the from-scratch score.
      CtcPrefixScorer::State st = scorer.Initial();
      for (int c : y) st = scorer.Extend(st, c);
      CHECK(st.prefix == y);
      CHECK(RelativeError(st.prefix_logp, got) < 1e-12);
      // P(prefix) = P(exactly prefix) + sum over c of P(prefix + c).
      double total = scorer.FinalLogProb(st);
      for (std::size_t c = 1; c < vocab; ++c) {
        total = LogAdd(total, scorer.Extend(st, static_cast<int>(c)).prefix_logp);
      }
      CHECK(std::abs(std::exp(total) - std::exp(got)) < 1e-6);
      const auto exact = dist.find(y);
      const double want_final =
          exact == dist.end() ? 0.0 : static_cast<double>(exact->second);
      CHECK(std::abs(std::exp(scorer.FinalLogProb(st)) - want_final) < 1e-12);
    }
    CHECK(scorer.PrefixLogProb(std::vector<int>{}) == 0.0);
  }
}

TEST_CASE("prefix scorer rejects the blank") {
  const LogProbMatrix m = Uniform(2, 3);
  const CtcPrefixScorer s(m);
  CHECK_THROWS_AS(s.Extend(s.Initial(), 0), Error);
  CHECK_THROWS_AS(s.Extend(s.Initial(), 3), Error);
}

TEST_CASE("hybrid loss") {
  CHECK(HybridLoss(2.0, 1.0, 0.3) == 0.3 * 2.0 + (1 - 0.3) * 1.0);
  CHECK(HybridLoss(2.0, 1.0, 0.3) == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(HybridLoss(2.0, 1.0, 0.0) == 1.0);
  CHECK(HybridLoss(2.0, 1.0, 1.0) == 2.0);
  CHECK(HybridLoss(INFINITY, 1.0, 0.0) == 1.0);
  CHECK(HybridLoss(2.0, INFINITY, 1.0) == 2.0);
  CHECK(HybridLoss(2.0, 1.0) == HybridLoss(2.0, 1.0, kDefaultCtcLossWeight));
  CHECK(kDefaultCtcLossWeight == 0.3);
  CHECK_THROWS_AS(HybridLoss(1, 1, -0.1), Error);
  CHECK_THROWS_AS(HybridLoss(1, 1, 1.5), Error);
  CHECK_THROWS_AS(HybridLoss(1, 1, NAN), Error);
}

TEST_CASE("matrix validation") {
  CHECK_THROWS_AS(LogProbMatrix(2, 2, {0.0}), Error);
  CHECK_THROWS_AS(LogProbMatrix(0, 2, {}).Validate(), Error);
  CHECK_THROWS_AS(LogProbMatrix(1, 1, {0.0}).Validate(), Error);
  CHECK_THROWS_AS(LogProbMatrix(1, 2, {-0.1, -0.1}).Validate(), Error);
  CHECK_THROWS_AS(LogProbMatrix(1, 2, {NAN, 0.0}).Validate(), Error);
  CHECK_THROWS_AS(LogProbMatrix(1, 2, {0.5, kLogZero}).Validate(), Error);
  CHECK_NOTHROW(LogProbMatrix(1, 2, {0.0, kLogZero}).Validate());
  const std::vector<double> logits{1, 2, 3, 0, 0, 0};
  const LogProbMatrix m = LogProbMatrix::FromLogits(2, 3, logits);
  CHECK_NOTHROW(m.Validate(1e-12));
  CHECK(m(1, 2) == doctest::Approx(-std::log(3.0)).epsilon(1e-15));
}

TEST_CASE("binary and json round trips") {
  std::mt19937_64 rng(3);
  LogProbMatrix m = RandomLogProbs(rng, 4, 3);
  std::vector<double> v = m.values();
  v[1] = kLogZero;
  m = LogProbMatrix(4, 3, v);

  std::stringstream bin;
  WriteLogProbBinary(m, bin);
  CHECK(bin.str().size() == 16 + 8 * 12);
  CHECK(bin.str().substr(0, 4) == "PKLP");
  CHECK(ReadLogProbBinary(bin) == m);

  std::stringstream json;
  WriteLogProbJson(m, json);
  CHECK(json.str().find("null") != std::string::npos);
  CHECK(ReadLogProbJson(json) == m);
}

TEST_CASE("binary format errors") {
  const LogProbMatrix m = Uniform(2, 2);
  std::stringstream bin;
  WriteLogProbBinary(m, bin);
  const std::string good = bin.str();

  std::istringstream truncated(good.substr(0, good.size() - 3));
  CHECK_THROWS_WITH_AS(ReadLogProbBinary(truncated),
                       doctest::Contains("truncated"), Error);
  std::istringstream trailing(good + "x");
  CHECK_THROWS_WITH_AS(ReadLogProbBinary(trailing),
                       doctest::Contains("trailing"), Error);
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  std::istringstream bm(bad_magic);
  CHECK_THROWS_WITH_AS(ReadLogProbBinary(bm), doctest::Contains("magic"),
                       Error);
  std::string bad_version = good;
  bad_version[4] = 9;
  std::istringstream bv(bad_version);
  CHECK_THROWS_WITH_AS(ReadLogProbBinary(bv), doctest::Contains("version"),
                       Error);
  std::istringstream short_json(R"({"frames":2,"vocab":2,"logprobs":[[0,null]]})");
  CHECK_THROWS_AS(ReadLogProbJson(short_json), Error);
}

TEST_CASE("file loading sniffs the layout") {
  const LogProbMatrix m = Uniform(3, 2);
  const auto bin_path = TempPath("m.bin");
  const auto json_path = TempPath("m.json");
  const auto junk_path = TempPath("junk");
  const auto bad_path = TempPath("bad.json");
  {
    std::ofstream b(bin_path, std::ios::binary);
    WriteLogProbBinary(m, b);
    std::ofstream j(json_path);
    WriteLogProbJson(m, j);
    std::ofstream k(junk_path);
    k << "hello";
    std::ofstream u(bad_path);
    u << R"({"frames":1,"vocab":2,"logprobs":[[0,0]]})";
  }
  CHECK(LoadLogProbFile(bin_path.string()) == m);
  CHECK(LoadLogProbFile(json_path.string()) == m);
  CHECK_THROWS_WITH_AS(LoadLogProbFile(junk_path.string()),
                       doctest::Contains("bad magic"), Error);
  // Rows that do not normalize are rejected on load.
  CHECK_THROWS_AS(LoadLogProbFile(bad_path.string()), Error);
  CHECK_THROWS_AS(LoadLogProbFile(TempPath("missing").string()), IoError);
  for (const auto& p : {bin_path, json_path, junk_path, bad_path}) {
    std::filesystem::remove(p);
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace phonekit
