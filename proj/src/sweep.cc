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

#include "phonekit/sweep.h"

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "phonekit/error.h"

namespace phonekit {

std::vector<SweepUtterance> ReadSweepManifest(
    std::istream& in, const std::filesystem::path& base_dir) {
  std::vector<SweepUtterance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string path;
    SweepUtterance u;
    try {
      const auto j = nlohmann::json::parse(line);
      u.id = j.at("id").get<std::string>();
      u.set = j.at("set").get<std::string>();
      u.reference = j.at("ref").get<std::string>();
      path = j.at("logprobs").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("sweep manifest line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    std::filesystem::path p(path);
    if (p.is_relative()) p = base_dir / p;
    u.logprobs = LoadLogProbFile(p.string());
    out.push_back(std::move(u));
  }
  if (in.bad()) throw IoError("failed reading sweep manifest");
  return out;
}

std::string TokenSurface(const std::string& entry) {
  if (entry.size() >= 2 && entry.front() == '/' && entry.back() == '/') {
    return entry.substr(1, entry.size() - 2);
  }
  if (entry.size() >= 2 && entry.front() == '<' && entry.back() == '>') {
    return "";
  }
  return entry;
}

std::string HypothesisText(const std::vector<int>& tokens,
                           const std::vector<std::string>& vocab) {
  std::string text;
  for (int t : tokens) text += TokenSurface(vocab.at(t));
  return text;
}

namespace {

struct Decoded {
  std::optional<std::string> text;
  std::string error;
};

std::vector<Decoded> DecodeAll(const std::vector<SweepUtterance>& utts,
                               const AttentionScorer* scorer,
                               const std::vector<std::string>& vocab,
                               const DecodeOptions& decode, unsigned jobs) {
  std::vector<Decoded> out(utts.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < utts.size(); i += stride) {
      try {
        const DecodeResult r = JointBeamSearch(utts[i].logprobs, scorer, decode);
        out[i].text = HypothesisText(r.nbest.at(0).tokens, vocab);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min<std::size_t>(jobs, utts.size()));
  if (n == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t k = 0; k < n; ++k) threads.emplace_back(work, k, n);
  }
  return out;
}

}  // namespace

SweepReport DecodeSweep(const std::vector<SweepUtterance>& utterances,
                        const AttentionScorer* scorer,
                        const std::vector<std::string>& vocab,
                        const SweepOptions& options) {
  if (options.ctc_weights.empty()) throw Error("no CTC weights to sweep");
  if (options.beams.empty()) throw Error("no beam sizes to sweep");
  std::set<std::string> ids;
  std::set<std::string> sets;
  for (const auto& u : utterances) {
    if (!ids.insert(u.id).second) throw Error("duplicate utterance id " + u.id);
    sets.insert(u.set);
  }

  SweepReport report;
  report.metric = options.metric;
  report.sets.assign(sets.begin(), sets.end());

  CorpusOptions corpus;
  corpus.metric = options.metric;
  corpus.table = options.table;
  corpus.jobs = options.jobs;

  for (double lambda : options.ctc_weights) {
    for (std::size_t beam : options.beams) {
      DecodeOptions decode;
      decode.ctc_weight = lambda;
      decode.beam = beam;
      decode.max_len = options.max_len;
      decode.prompt = options.prompt;
      // Fail fast on settings that are invalid for every utterance.
      if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error("CTC weight must lie in [0, 1]");
      }
      if (beam == 0) throw Error("beam size must be positive");

      const auto decoded =
          DecodeAll(utterances, scorer, vocab, decode, options.jobs);
      SweepCell cell;
      cell.ctc_weight = lambda;
      cell.beam = beam;
      std::vector<ScorePair> pairs;
      for (std::size_t i = 0; i < utterances.size(); ++i) {
        if (decoded[i].text) {
          pairs.push_back({utterances[i].id, utterances[i].set,
                           *decoded[i].text, utterances[i].reference});
        } else {
          cell.decode_failures.push_back({utterances[i].id, decoded[i].error});
        }
      }
      std::sort(cell.decode_failures.begin(), cell.decode_failures.end(),
                [](const auto& a, const auto& b) { return a.id < b.id; });
      cell.score = ScoreCorpus(pairs, corpus);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

void WriteSweepTsv(const SweepReport& report, std::ostream& out, int digits) {
  out << "ctc_weight\tbeam";
  for (const auto& s : report.sets) out << '\t' << s;
  out << "\tall\tfailures\n";
  for (const SweepCell& cell : report.cells) {
    std::ostringstream lambda;
    lambda << cell.ctc_weight;
    out << lambda.str() << '\t' << cell.beam;
    for (const auto& s : report.sets) {
      const auto it = cell.score.per_language.find(s);
      out << '\t';
      if (it == cell.score.per_language.end() || it->second.ref_units == 0) {
        out << '-';
      } else {
        out << ToDecimal(CorpusScore::Score(it->second, false), digits);
      }
    }
    out << '\t';
    if (cell.score.total_ref_units == 0) {
      out << '-';
    } else {
      out << ToDecimal(cell.score.Score(), digits);
    }
    out << '\t'
        << cell.score.failures.size() + cell.decode_failures.size() << '\n';
  }
}

}  // namespace phonekit
