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

// Grid search over decoding settings, scored per evaluation set.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "phonekit/beam_search.h"
#include "phonekit/metrics.h"

namespace phonekit {

struct SweepUtterance {
  std::string id;
  std::string set;
  LogProbMatrix logprobs;
  std::string reference;  // IPA
};

// One JSON object per line: {"id", "set", "logprobs", "ref"}. Relative
// log-prob paths resolve against `base_dir`.
std::vector<SweepUtterance> ReadSweepManifest(
    std::istream& in, const std::filesystem::path& base_dir);

// Output surface of a vocabulary entry: slash-wrapped phones are unwrapped,
// angle-bracket specials map to nothing, anything else is kept.
std::string TokenSurface(const std::string& entry);
std::string HypothesisText(const std::vector<int>& tokens,
                           const std::vector<std::string>& vocab);

struct SweepOptions {
  std::vector<double> ctc_weights;
  std::vector<std::size_t> beams;
  std::size_t max_len = 0;
  std::vector<std::string> prompt;
  Metric metric = Metric::kPfer;
  const FeatureTable* table = nullptr;
  unsigned jobs = 1;
};

struct SweepCell {
  double ctc_weight = 0;
  std::size_t beam = 0;
  CorpusScore score;  // per_language holds the per-set totals
  std::vector<PairFailure> decode_failures;
};

struct SweepReport {
  Metric metric = Metric::kPfer;
  std::vector<std::string> sets;  // sorted
  std::vector<SweepCell> cells;   // ctc_weight-major, in option order
};

SweepReport DecodeSweep(const std::vector<SweepUtterance>& utterances,
                        const AttentionScorer* scorer,
                        const std::vector<std::string>& vocab,
                        const SweepOptions& options);

// Rows are settings, columns are sets followed by "all". Empty cells (a set
// with no scored utterance) print "-".
void WriteSweepTsv(const SweepReport& report, std::ostream& out,
                   int digits = 6);

}  // namespace phonekit
