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

#include "phonekit/beam_search.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>

#include "json.hpp"
#include "phonekit/error.h"

namespace phonekit {

namespace {

constexpr double kRowTolerance = 1e-6;

std::string JoinTokens(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

TableScorer::Row ParseRow(const nlohmann::json& j,
                          const std::map<std::string, int>& index,
                          const std::string& where) {
  if (!j.is_object()) throw Error(where + ": row must be an object");
  TableScorer::Row row(index.size(), kLogZero);
  for (const auto& [token, value] : j.items()) {
    const auto it = index.find(token);
    if (it == index.end()) {
      throw Error(where + ": unknown token \"" + token + "\"");
    }
    row[it->second] = value.is_null() ? kLogZero : value.get<double>();
  }
  if (std::abs(LogSumExp(row)) > kRowTolerance) {
    throw Error(where + ": row does not normalize");
  }
  return row;
}

std::map<std::string, TableScorer::Row> ParseTable(
    const nlohmann::json& j, const std::map<std::string, int>& index,
    const std::string& where) {
  if (!j.is_object()) throw Error(where + " must be an object");
  std::map<std::string, TableScorer::Row> table;
  for (const auto& [prefix, row] : j.items()) {
    table[prefix] = ParseRow(row, index, where + " \"" + prefix + "\"");
  }
  return table;
}

}  // namespace

TableScorer TableScorer::Read(std::istream& in) {
  TableScorer s;
  try {
    const auto j = nlohmann::json::parse(in);
    s.vocab_ = j.at("vocab").get<std::vector<std::string>>();
    if (s.vocab_.size() < 2) throw Error("scorer vocabulary too small");
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < s.vocab_.size(); ++i) {
      if (!index.emplace(s.vocab_[i], static_cast<int>(i)).second) {
        throw Error("duplicate scorer token \"" + s.vocab_[i] + "\"");
      }
    }
    if (j.contains("table")) s.table_ = ParseTable(j["table"], index, "table");
    if (j.contains("default")) s.default_ = ParseRow(j["default"], index, "default");
    if (j.contains("prompts")) {
      for (const auto& [prompt, table] : j["prompts"].items()) {
        s.prompts_[prompt] =
            ParseTable(table, index, "prompt \"" + prompt + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad scorer JSON: ") + e.what());
  }
  return s;
}

TableScorer TableScorer::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Read(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::vector<double> TableScorer::NextLogProbs(
    std::span<const std::string> prompt, std::span<const int> prefix) const {
  std::vector<std::string> words;
  for (int t : prefix) words.push_back(vocab_.at(t));
  const std::string key = JoinTokens(words);

  const std::map<std::string, Row>* table = &table_;
  if (const auto it = prompts_.find(JoinTokens(prompt)); it != prompts_.end()) {
    table = &it->second;
  }
  if (const auto it = table->find(key); it != table->end()) return it->second;
  if (!default_.empty()) return default_;
  throw Error("scorer has no row for prefix \"" + key + "\"");
}

double JointScore(double ctc_weight, double ctc, double att) {
  double score = 0;
  if (ctc_weight > 0) score += ctc_weight * ctc;
  if (ctc_weight < 1) score += (1 - ctc_weight) * att;
  return score;
}

namespace {

struct Node {
  Hypothesis hyp;
  std::optional<CtcPrefixScorer::State> ctc;
};

// Best first; ties go to the lexicographically smaller token sequence, with
// end-of-sequence counted as token 0, so a shorter hypothesis wins over its
// own extensions.
bool Better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  std::vector<int> ka = a.tokens;
  std::vector<int> kb = b.tokens;
  if (a.finished) ka.push_back(kEndOfSequence);
  if (b.finished) kb.push_back(kEndOfSequence);
  return ka < kb;
}

double RankScore(const Hypothesis& h, bool length_normalize) {
  if (!length_normalize) return h.score;
  return h.score / static_cast<double>(h.tokens.size() + 1);
}

void CheckDistribution(const std::vector<double>& row, std::size_t vocab) {
  if (row.size() != vocab) {
    throw Error("attention scorer returned " + std::to_string(row.size()) +
                " scores for a vocabulary of " + std::to_string(vocab));
  }
  for (double v : row) {
    if (std::isnan(v) || v > kRowTolerance) {
      throw Error("attention scorer returned a value that is not a "
                  "log-probability");
    }
  }
  if (std::abs(LogSumExp(row)) > kRowTolerance) {
    throw Error("attention scorer returned an unnormalized distribution");
  }
}

}  // namespace

DecodeResult JointBeamSearch(const LogProbMatrix& logprobs,
                             const AttentionScorer* scorer,
                             const DecodeOptions& options) {
  const double lambda = options.ctc_weight;
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error("CTC weight must lie in [0, 1]");
  }
  if (options.beam == 0) throw Error("beam size must be positive");
  const bool use_att = lambda < 1;
  if (use_att && scorer == nullptr) {
    throw Error("an attention scorer is required unless the CTC weight is 1");
  }
  const std::size_t vocab = logprobs.vocab();
  if (scorer != nullptr && scorer->vocab_size() != vocab) {
    throw Error("scorer vocabulary (" + std::to_string(scorer->vocab_size()) +
                ") does not match the log-prob matrix (" +
                std::to_string(vocab) + ")");
  }
  const std::size_t max_len =
      options.max_len == 0 ? logprobs.frames() : options.max_len;
  const std::size_t nbest = options.nbest == 0 ? options.beam : options.nbest;

  const CtcPrefixScorer ctc(logprobs);
  std::vector<Node> running(1);
  running[0].ctc = ctc.Initial();
  std::vector<Hypothesis> ended;
  // Latest non-empty set of unfinished hypotheses, returned when nothing
  // reaches end-of-sequence.
  std::vector<Hypothesis> frontier;

  for (std::size_t step = 0; step <= max_len && !running.empty(); ++step) {
    const bool last_step = step == max_len;
    frontier.clear();
    for (const Node& node : running) frontier.push_back(node.hyp);
    std::vector<Node> candidates;
    for (const Node& node : running) {
      std::vector<double> att(vocab, 0.0);
      if (use_att) {
        att = scorer->NextLogProbs(options.prompt, node.hyp.tokens);
        CheckDistribution(att, vocab);
      }

      Node eos;
      eos.hyp.tokens = node.hyp.tokens;
      eos.hyp.finished = true;
      eos.hyp.ctc_score = ctc.FinalLogProb(*node.ctc);
      eos.hyp.att_score = node.hyp.att_score + att[kEndOfSequence];
      eos.hyp.score = JointScore(lambda, eos.hyp.ctc_score, eos.hyp.att_score);
      if (eos.hyp.score != kLogZero) candidates.push_back(std::move(eos));

      if (last_step) continue;
      for (std::size_t c = 1; c < vocab; ++c) {
        if (use_att && att[c] == kLogZero) continue;
        Node next;
        next.ctc = ctc.Extend(*node.ctc, static_cast<int>(c));
        next.hyp.tokens = node.hyp.tokens;
        next.hyp.tokens.push_back(static_cast<int>(c));
        next.hyp.ctc_score = next.ctc->prefix_logp;
        next.hyp.att_score = node.hyp.att_score + att[c];
        next.hyp.score =
            JointScore(lambda, next.hyp.ctc_score, next.hyp.att_score);
        if (next.hyp.score == kLogZero) continue;
        candidates.push_back(std::move(next));
      }
    }

    const std::size_t keep = std::min(options.beam, candidates.size());
    std::partial_sort(
        candidates.begin(), candidates.begin() + keep, candidates.end(),
        [](const Node& a, const Node& b) { return Better(a.hyp, b.hyp); });
    candidates.resize(keep);

    std::vector<Node> survivors;
    for (Node& n : candidates) {
      if (n.hyp.finished) {
        ended.push_back(std::move(n.hyp));
      } else {
        survivors.push_back(std::move(n));
      }
    }
    running = std::move(survivors);
  }

  DecodeResult result;
  std::vector<Hypothesis> pool = std::move(ended);
  if (pool.empty()) {
    result.finished = false;
    pool = std::move(frontier);
  }
  const bool norm = options.length_normalize;
  std::stable_sort(pool.begin(), pool.end(),
                   [norm](const Hypothesis& a, const Hypothesis& b) {
                     const double ra = RankScore(a, norm);
                     const double rb = RankScore(b, norm);
                     if (ra != rb) return ra > rb;
                     return Better(a, b);
                   });
  if (pool.size() > nbest) pool.resize(nbest);
  result.nbest = std::move(pool);
  return result;
}

}  // namespace phonekit
