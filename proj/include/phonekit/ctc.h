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

// CTC forward loss, hybrid loss and incremental prefix scoring. Everything
// stays in the log domain; index 0 of the vocabulary is the blank.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace phonekit {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr int kBlank = 0;

// log(exp(a) + exp(b)) without leaving the log domain.
double LogAdd(double a, double b);
double LogSumExp(std::span<const double> values);

class LogProbMatrix {
 public:
  LogProbMatrix() = default;
  // Row-major frames x vocab. Not validated; see Validate().
  LogProbMatrix(std::size_t frames, std::size_t vocab,
                std::vector<double> values);

  // Row-wise log-softmax of arbitrary scores.
  static LogProbMatrix FromLogits(std::size_t frames, std::size_t vocab,
                                  std::span<const double> logits);

  std::size_t frames() const { return frames_; }
  std::size_t vocab() const { return vocab_; }
  double operator()(std::size_t t, std::size_t v) const {
    return values_[t * vocab_ + v];
  }
  std::span<const double> row(std::size_t t) const {
    return std::span(values_).subspan(t * vocab_, vocab_);
  }
  const std::vector<double>& values() const { return values_; }

  // Throws Error unless every row log-sum-exps to 0 within `tolerance` and
  // no value exceeds `tolerance`.
  void Validate(double tolerance = 1e-6) const;

  friend bool operator==(const LogProbMatrix&, const LogProbMatrix&) = default;

 private:
  std::size_t frames_ = 0;
  std::size_t vocab_ = 0;
  std::vector<double> values_;
};

// Binary layout: magic, version, T, V as little-endian uint32, then T*V
// little-endian IEEE-754 doubles, row-major.
inline constexpr std::uint32_t kLogProbMagic = 0x504C4B50;  // "PKLP"
inline constexpr std::uint32_t kLogProbVersion = 1;

LogProbMatrix ReadLogProbBinary(std::istream& in);
void WriteLogProbBinary(const LogProbMatrix& m, std::ostream& out);

// Debug layout: {"frames": T, "vocab": V, "logprobs": [[...], ...]}.
LogProbMatrix ReadLogProbJson(std::istream& in);
void WriteLogProbJson(const LogProbMatrix& m, std::ostream& out);

// Picks the layout from the first bytes and validates the result.
LogProbMatrix LoadLogProbFile(const std::string& path);

// Negative log-likelihood of `target` (indices in [1, V)) summed over all
// CTC alignments. Throws Error when the target cannot fit in T frames.
double CtcForwardLoss(const LogProbMatrix& logprobs,
                      std::span<const int> target);

// alpha * ctc_nll + (1 - alpha) * att_nll; alpha must lie in [0, 1].
inline constexpr double kDefaultCtcLossWeight = 0.3;
double HybridLoss(double ctc_nll, double att_nll,
                  double alpha = kDefaultCtcLossWeight);

// Incremental CTC prefix probabilities. A state holds, for every frame t,
// the log-probability that frames [0, t] emit exactly the prefix and end in
// a non-blank (r_nonblank) or blank (r_blank) frame.
class CtcPrefixScorer {
 public:
  struct State {
    std::vector<int> prefix;
    std::vector<double> r_nonblank;
    std::vector<double> r_blank;
    double prefix_logp = 0;  // log P(output starts with prefix)
  };

  explicit CtcPrefixScorer(const LogProbMatrix& logprobs);
  // Holds a reference, so temporaries are refused.
  explicit CtcPrefixScorer(LogProbMatrix&&) = delete;

  State Initial() const;
  // State for prefix + token; token must not be the blank.
  State Extend(const State& state, int token) const;
  // log P(output == prefix).
  double FinalLogProb(const State& state) const;

  // From scratch, for tests and one-off queries.
  double PrefixLogProb(std::span<const int> prefix) const;

 private:
  const LogProbMatrix& logprobs_;
};

}  // namespace phonekit
