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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace phonekit::testing {

std::vector<int> CollapseCtcPath(std::span<const int> path) {
  std::vector<int> out;
  int prev = -1;
  for (int s : path) {
    if (s != prev && s != kBlank) out.push_back(s);
    prev = s;
  }
  return out;
}

OutputDistribution CtcOutputDistribution(const LogProbMatrix& m) {
  OutputDistribution dist;
  const std::size_t frames = m.frames();
  const std::size_t vocab = m.vocab();
  std::vector<int> path(frames, 0);
  while (true) {
    long double logp = 0;
    for (std::size_t t = 0; t < frames; ++t) logp += m(t, path[t]);
    dist[CollapseCtcPath(path)] += std::exp(logp);
    // Odometer increment.
    std::size_t t = 0;
    while (t < frames && ++path[t] == static_cast<int>(vocab)) path[t++] = 0;
    if (t == frames) break;
  }
  return dist;
}

long double BrutePrefixMass(const OutputDistribution& dist,
                            std::span<const int> prefix) {
  long double sum = 0;
  for (const auto& [out, p] : dist) {
    if (out.size() >= prefix.size() &&
        std::equal(prefix.begin(), prefix.end(), out.begin())) {
      sum += p;
    }
  }
  return sum;
}

std::vector<std::vector<int>> AllLabelSequences(std::size_t vocab,
                                                std::size_t max_len) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void()> rec = [&] {
    out.push_back(cur);
    if (cur.size() == max_len) return;
    for (std::size_t c = 1; c < vocab; ++c) {
      cur.push_back(static_cast<int>(c));
      rec();
      cur.pop_back();
    }
  };
  rec();
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Ranking key: the sequence with end-of-sequence (0) appended.
std::vector<int> Key(const std::vector<int>& y) {
  std::vector<int> k = y;
  k.push_back(0);
  return k;
}

}  // namespace

BruteDecode ExhaustiveJointDecode(const LogProbMatrix& m,
                                  const AttentionScorer* scorer,
                                  double lambda, std::size_t max_len,
                                  std::span<const std::string> prompt) {
  const OutputDistribution dist = CtcOutputDistribution(m);
  BruteDecode best;
  bool have = false;
  for (const auto& y : AllLabelSequences(m.vocab(), max_len)) {
    double ctc = kLogZero;
    if (const auto it = dist.find(y); it != dist.end() && it->second > 0) {
      ctc = static_cast<double>(std::log(it->second));
    }
    double att = 0;
    if (lambda < 1) {
      for (std::size_t i = 0; i <= y.size(); ++i) {
        const auto row = scorer->NextLogProbs(
            prompt, std::span<const int>(y.data(), i));
        att += row[i < y.size() ? y[i] : 0];
      }
    }
    double score = 0;
    if (lambda > 0) score += lambda * ctc;
    if (lambda < 1) score += (1 - lambda) * att;
    if (std::isnan(score) || score == kLogZero) continue;
    if (!have || score > best.score ||
        (score == best.score && Key(y) < Key(best.tokens))) {
      if (have) best.runner_up = std::max(best.runner_up, best.score);
      best.tokens = y;
      best.score = score;
      have = true;
    } else {
      best.runner_up = std::max(best.runner_up, score);
    }
  }
  return best;
}

std::vector<int> AttentionOnlyBeamSearch(const AttentionScorer& scorer,
                                         std::size_t beam,
                                         std::size_t max_len,
                                         std::span<const std::string> prompt) {
  struct Item {
    std::vector<int> y;
    double s = 0;
    bool done = false;
  };
  auto before = [](const Item& a, const Item& b) {
    if (a.s != b.s) return a.s > b.s;
    std::vector<int> ka = a.y;
    std::vector<int> kb = b.y;
    if (a.done) ka.push_back(0);
    if (b.done) kb.push_back(0);
    return ka < kb;
  };
  std::vector<Item> live{Item{}};
  std::vector<Item> done;
  std::vector<Item> last_live;
  for (std::size_t step = 0; step <= max_len && !live.empty(); ++step) {
    last_live = live;
    std::vector<Item> next;
    for (const Item& h : live) {
      const auto row = scorer.NextLogProbs(prompt, h.y);
      if (row[0] != kLogZero) next.push_back({h.y, h.s + row[0], true});
      if (step == max_len) continue;
      for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c] == kLogZero) continue;
        Item e{h.y, h.s + row[c], false};
        e.y.push_back(static_cast<int>(c));
        next.push_back(e);
      }
    }
    std::sort(next.begin(), next.end(), before);
    if (next.size() > beam) next.resize(beam);
    live.clear();
    for (auto& e : next) (e.done ? done : live).push_back(e);
  }
  const auto& pool = done.empty() ? last_live : done;
  return std::min_element(pool.begin(), pool.end(), before)->y;
}

LogProbMatrix RandomLogProbs(std::mt19937_64& rng, std::size_t frames,
                             std::size_t vocab, double spread) {
  std::normal_distribution<double> g(0.0, spread);
  std::vector<double> logits(frames * vocab);
  for (double& x : logits) x = g(rng);
  return LogProbMatrix::FromLogits(frames, vocab, logits);
}

std::vector<std::string> LetterVocab(std::size_t vocab) {
  std::vector<std::string> v{"<eos>"};
  for (std::size_t i = 1; i < vocab; ++i) {
    v.push_back("/" + std::string(1, static_cast<char>('a' + i - 1)) + "/");
  }
  return v;
}

std::string RandomScorerJson(std::mt19937_64& rng, std::size_t vocab,
                             std::size_t max_len, double zero_rate) {
  const auto names = LetterVocab(vocab);
  std::normal_distribution<double> g(0.0, 1.5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  nlohmann::json table = nlohmann::json::object();
  for (const auto& prefix : AllLabelSequences(vocab, max_len)) {
    std::string key;
    for (int t : prefix) key += (key.empty() ? "" : " ") + names[t];
    std::vector<double> logits(vocab);
    std::vector<bool> zero(vocab, false);
    for (std::size_t i = 0; i < vocab; ++i) {
      logits[i] = g(rng);
      zero[i] = u(rng) < zero_rate;
    }
    zero[std::uniform_int_distribution<std::size_t>(0, vocab - 1)(rng)] = false;
    double hi = kLogZero;
    for (std::size_t i = 0; i < vocab; ++i) {
      if (!zero[i]) hi = std::max(hi, logits[i]);
    }
    long double z = 0;
    for (std::size_t i = 0; i < vocab; ++i) {
      if (!zero[i]) z += std::exp(static_cast<long double>(logits[i] - hi));
    }
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t i = 0; i < vocab; ++i) {
      if (zero[i]) {
        row[names[i]] = nullptr;
      } else {
        row[names[i]] = logits[i] - hi - static_cast<double>(std::log(z));
      }
    }
    table[key] = row;
  }
  nlohmann::json j;
  j["vocab"] = names;
  j["table"] = table;
  return j.dump();
}

TableScorer ScorerFromJson(const std::string& json) {
  std::istringstream in(json);
  return TableScorer::Read(in);
}

double RelativeError(double got, double want) {
  if (got == want) return 0;
  if (std::isinf(got) || std::isinf(want)) return INFINITY;
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

SweepFixture MakeSweepFixture(std::uint64_t seed, std::size_t utterances) {
  std::mt19937_64 rng(seed);
  SweepFixture f;
  f.vocab = {"<eos>", "/p/", "/a/", "/t/", "/m/"};
  const std::size_t vocab = f.vocab.size();

  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> row(vocab);
  double z = 0;
  for (double& x : row) z += (x = u(rng));
  nlohmann::json def = nlohmann::json::object();
  for (std::size_t i = 0; i < vocab; ++i) def[f.vocab[i]] = std::log(row[i] / z);
  nlohmann::json j;
  j["vocab"] = f.vocab;
  j["default"] = def;
  f.scorer_json = j.dump();

  std::uniform_int_distribution<int> len(1, 3);
  std::uniform_int_distribution<int> label(1, static_cast<int>(vocab) - 1);
  std::normal_distribution<double> noise(0.0, 1.5);
  for (std::size_t n = 0; n < utterances; ++n) {
    std::vector<int> ref(len(rng));
    for (int& x : ref) x = label(rng);
    const std::size_t frames = 2 * ref.size();
    std::vector<double> logits(frames * vocab);
    for (std::size_t t = 0; t < frames; ++t) {
      const int peak = t % 2 == 0 ? ref[t / 2] : kBlank;
      for (std::size_t v = 0; v < vocab; ++v) {
        logits[t * vocab + v] =
            noise(rng) + (static_cast<int>(v) == peak ? 2.0 : 0.0);
      }
    }
    SweepUtterance su;
    su.id = "s" + std::to_string(1000 + n);
    su.set = n % 2 == 0 ? "dev" : "test";
    su.logprobs = LogProbMatrix::FromLogits(frames, vocab, logits);
    su.reference = HypothesisText(ref, f.vocab);
    f.utterances.push_back(std::move(su));
  }
  return f;
}

std::vector<Utterance> MakeCorpusFixture(std::uint64_t seed,
                                         std::size_t count) {
  static const std::vector<std::pair<std::string, std::string>> kWords{
      {"possum", "p\u02B0\u0254s\u0259m"}, {"bat", "b\u00E6t"},
      {"man", "m\u00E6n"},                 {"fill", "f\u026Al"},
      {"top", "t\u0251p"},                 {"dog", "d\u0251\u0261"},
      {"sing", "s\u026A\u014B"},          {"lamp", "l\u00E6mp"}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> word(0, kWords.size() - 1);
  std::uniform_int_distribution<int> n(1, 4);
  std::uniform_real_distribution<double> dur(0.5, 6.0);
  std::vector<Utterance> out;
  for (std::size_t i = 0; i < count; ++i) {
    Utterance u;
    char id[32];
    std::snprintf(id, sizeof id, "utt%04zu", i);
    u.id = id;
    u.lang = i % 4 == 3 ? "deu" : "eng";
    for (int k = n(rng); k > 0; --k) {
      const auto& [text, ipa] = kWords[word(rng)];
      u.text += (u.text.empty() ? "" : " ") + text;
      u.ipa += (u.ipa.empty() ? "" : " ") + ipa;
    }
    u.duration_s = std::round(dur(rng) * 100) / 100;
    out.push_back(std::move(u));
  }
  for (std::size_t phones : {300u, 301u}) {
    Utterance u;
    u.id = "len" + std::to_string(phones);
    u.lang = "eng";
    u.text = "long";
    for (std::size_t k = 0; k < phones; ++k) u.ipa += k % 2 ? "a" : "t";
    out.push_back(std::move(u));
  }
  return out;
}

std::string UtteranceToJson(const Utterance& u) {
  nlohmann::ordered_json j;
  j["id"] = u.id;
  j["lang"] = u.lang;
  j["text"] = u.text;
  j["ipa"] = u.ipa;
  if (u.duration_s) j["duration_s"] = *u.duration_s;
  if (u.audio) j["audio"] = *u.audio;
  return j.dump();
}

}  // namespace phonekit::testing
