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

// Label-synchronous beam search over a joint CTC / attention score
//
//   score(y) = lambda * log P_ctc(y | x) + (1 - lambda) * log P_att(y | x)
//
// Unfinished hypotheses use the CTC prefix probability. Both the CTC matrix
// and the attention scorer share one vocabulary; index 0 is the CTC blank on
// the encoder side and the end-of-sequence token on the decoder side.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phonekit/ctc.h"

namespace phonekit {

inline constexpr int kEndOfSequence = 0;
inline constexpr double kDefaultCtcDecodeWeight = 0.3;
inline constexpr std::size_t kDefaultBeamSize = 3;

class AttentionScorer {
 public:
  virtual ~AttentionScorer() = default;

  // Log-distribution over the whole vocabulary for the token after
  // `prefix`. Slot 0 is end-of-sequence.
  virtual std::vector<double> NextLogProbs(
      std::span<const std::string> prompt,
      std::span<const int> prefix) const = 0;

  virtual std::size_t vocab_size() const = 0;
};

// A scorer read from JSON, for tests and offline experiments:
//
//   {"vocab": ["<eos>", "a", "b"],
//    "table": {"": {"a": -0.1, "b": -2.4}, "a": {"<eos>": -0.2, ...}},
//    "default": {"<eos>": -0.7, ...},
//    "prompts": {"<eng> <pr>": {"": {...}, ...}}}
//
// Table keys are prefixes as space-joined vocabulary entries. Tokens absent
// from a row get log(0). A prompt-specific table, keyed by the space-joined
// prompt, wins over "table"; "default" covers prefixes with no row. Every row
// must normalize.
class TableScorer : public AttentionScorer {
 public:
  using Row = std::vector<double>;

  static TableScorer Read(std::istream& in);
  static TableScorer LoadFile(const std::string& path);

  std::vector<double> NextLogProbs(std::span<const std::string> prompt,
                                   std::span<const int> prefix) const override;
  std::size_t vocab_size() const override { return vocab_.size(); }
  const std::vector<std::string>& vocab() const { return vocab_; }

 private:
  std::vector<std::string> vocab_;
  std::map<std::string, Row> table_;
  std::map<std::string, std::map<std::string, Row>> prompts_;
  Row default_;
};

struct DecodeOptions {
  double ctc_weight = kDefaultCtcDecodeWeight;  // lambda
  std::size_t beam = kDefaultBeamSize;
  // Longest output, excluding end-of-sequence. 0 means the frame count.
  std::size_t max_len = 0;
  // Rank finished hypotheses by score / (length + 1).
  bool length_normalize = false;
  // Number of hypotheses returned. 0 means the beam size.
  std::size_t nbest = 0;
  std::vector<std::string> prompt;
};

struct Hypothesis {
  std::vector<int> tokens;  // without end-of-sequence
  double score = 0;         // weighted total
  double ctc_score = 0;
  double att_score = 0;
  bool finished = false;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

struct DecodeResult {
  std::vector<Hypothesis> nbest;  // best first
  // False when no hypothesis reached end-of-sequence within max_len; nbest
  // then holds the best unfinished hypotheses.
  bool finished = true;
};

// Weighted combination in which a zero weight drops its term.
double JointScore(double ctc_weight, double ctc, double att);

// `scorer` may be null only when ctc_weight is 1. Throws Error on invalid
// options or on a scorer/matrix vocabulary mismatch.
DecodeResult JointBeamSearch(const LogProbMatrix& logprobs,
                             const AttentionScorer* scorer,
                             const DecodeOptions& options = {});

}  // namespace phonekit
