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

#include "phonekit/ctc.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

#include "phonekit/error.h"

namespace phonekit {

double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

double LogSumExp(std::span<const double> values) {
  double hi = kLogZero;
  for (double v : values) hi = std::max(hi, v);
  if (hi == kLogZero) return kLogZero;
  if (std::isinf(hi)) return hi;
  double sum = 0;
  for (double v : values) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

LogProbMatrix::LogProbMatrix(std::size_t frames, std::size_t vocab,
                             std::vector<double> values)
    : frames_(frames), vocab_(vocab), values_(std::move(values)) {
  if (values_.size() != frames_ * vocab_) {
    throw Error("log-prob matrix has " + std::to_string(values_.size()) +
                " values, expected " + std::to_string(frames_ * vocab_));
  }
}

LogProbMatrix LogProbMatrix::FromLogits(std::size_t frames, std::size_t vocab,
                                        std::span<const double> logits) {
  if (logits.size() != frames * vocab) {
    throw Error("logit count does not match frames x vocab");
  }
  std::vector<double> values(logits.begin(), logits.end());
  for (std::size_t t = 0; t < frames; ++t) {
    const std::span<double> row(values.data() + t * vocab, vocab);
    const double z = LogSumExp(row);
    for (double& v : row) v -= z;
  }
  return LogProbMatrix(frames, vocab, std::move(values));
}

void LogProbMatrix::Validate(double tolerance) const {
  if (frames_ == 0) throw Error("log-prob matrix has no frames");
  if (vocab_ < 2) throw Error("log-prob matrix needs a blank and one label");
  for (std::size_t t = 0; t < frames_; ++t) {
    for (double v : row(t)) {
      if (std::isnan(v) || v > tolerance) {
        throw Error("frame " + std::to_string(t) +
                    " holds a value that is not a log-probability");
      }
    }
    const double z = LogSumExp(row(t));
    if (!(std::abs(z) <= tolerance)) {
      throw Error("frame " + std::to_string(t) +
                  " does not normalize (log-sum-exp " + std::to_string(z) +
                  ")");
    }
  }
}

namespace {

std::uint32_t LoadLe32(const unsigned char* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 |
         std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

void StoreLe32(std::uint32_t v, unsigned char* p) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

double LoadLeDouble(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = bits << 8 | p[i];
  return std::bit_cast<double>(bits);
}

void StoreLeDouble(double v, unsigned char* p) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(bits >> (8 * i));
}

// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 32;

}  // namespace

LogProbMatrix ReadLogProbBinary(std::istream& in) {
  std::array<unsigned char, 16> header{};
  if (!in.read(reinterpret_cast<char*>(header.data()), header.size())) {
    throw Error("truncated log-prob header");
  }
  if (LoadLe32(header.data()) != kLogProbMagic) {
    throw Error("not a log-prob file (bad magic)");
  }
  const std::uint32_t version = LoadLe32(header.data() + 4);
  if (version != kLogProbVersion) {
    throw Error("unsupported log-prob version " + std::to_string(version));
  }
  const std::uint64_t frames = LoadLe32(header.data() + 8);
  const std::uint64_t vocab = LoadLe32(header.data() + 12);
  if (frames * vocab > kMaxCells) throw Error("log-prob matrix too large");
  std::vector<unsigned char> raw(frames * vocab * 8);
  if (!in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(raw.size()))) {
    throw Error("truncated log-prob payload");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error("trailing bytes after log-prob payload");
  }
  std::vector<double> values(frames * vocab);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = LoadLeDouble(raw.data() + 8 * i);
  }
  return LogProbMatrix(frames, vocab, std::move(values));
}

void WriteLogProbBinary(const LogProbMatrix& m, std::ostream& out) {
  std::array<unsigned char, 16> header{};
  StoreLe32(kLogProbMagic, header.data());
  StoreLe32(kLogProbVersion, header.data() + 4);
  StoreLe32(static_cast<std::uint32_t>(m.frames()), header.data() + 8);
  StoreLe32(static_cast<std::uint32_t>(m.vocab()), header.data() + 12);
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  std::array<unsigned char, 8> cell{};
  for (double v : m.values()) {
    StoreLeDouble(v, cell.data());
    out.write(reinterpret_cast<const char*>(cell.data()), cell.size());
  }
}

LogProbMatrix ReadLogProbJson(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    const auto frames = j.at("frames").get<std::size_t>();
    const auto vocab = j.at("vocab").get<std::size_t>();
    const auto& rows = j.at("logprobs");
    if (!rows.is_array() || rows.size() != frames) {
      throw Error("\"logprobs\" must hold one row per frame");
    }
    std::vector<double> values;
    values.reserve(frames * vocab);
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != vocab) {
        throw Error("every log-prob row must hold \"vocab\" values");
      }
      for (const auto& v : row) {
        // JSON has no infinities; null stands for log(0).
        values.push_back(v.is_null() ? kLogZero : v.get<double>());
      }
    }
    return LogProbMatrix(frames, vocab, std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad log-prob JSON: ") + e.what());
  }
}

void WriteLogProbJson(const LogProbMatrix& m, std::ostream& out) {
  nlohmann::ordered_json j;
  j["frames"] = m.frames();
  j["vocab"] = m.vocab();
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < m.frames(); ++t) {
    auto row = nlohmann::ordered_json::array();
    for (double v : m.row(t)) {
      if (v == kLogZero) {
        row.push_back(nullptr);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  j["logprobs"] = std::move(rows);
  out << j.dump() << '\n';
}

LogProbMatrix LoadLogProbFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::array<unsigned char, 4> magic{};
  in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  const bool binary = in.gcount() == 4 && LoadLe32(magic.data()) == kLogProbMagic;
  in.clear();
  in.seekg(0);
  if (!binary) {
    // Anything that is not the binary layout must be the JSON object.
    char c = 0;
    while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
    }
    if (c != '{') {
      throw Error(path + ": bad magic (neither a binary log-prob file nor JSON)");
    }
    in.clear();
    in.seekg(0);
  }
  LogProbMatrix m;
  try {
    m = binary ? ReadLogProbBinary(in) : ReadLogProbJson(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
  if (in.bad()) throw IoError("read failed: " + path);
  try {
    m.Validate();
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
  return m;
}

double CtcForwardLoss(const LogProbMatrix& logprobs,
                      std::span<const int> target) {
  const std::size_t frames = logprobs.frames();
  const std::size_t vocab = logprobs.vocab();
  std::size_t needed = target.size();
  for (std::size_t u = 0; u < target.size(); ++u) {
    if (target[u] <= kBlank || static_cast<std::size_t>(target[u]) >= vocab) {
      throw Error("target label " + std::to_string(target[u]) +
                  " outside [1, " + std::to_string(vocab) + ")");
    }
    if (u > 0 && target[u] == target[u - 1]) ++needed;  // forced blank
  }
  if (needed > frames) {
    throw Error("target longer than frames allow (needs " +
                std::to_string(needed) + ", have " + std::to_string(frames) +
                ")");
  }

  // Extended labels: blank, y1, blank, y2, ..., blank.
  const std::size_t states = 2 * target.size() + 1;
  auto label = [&](std::size_t s) {
    return s % 2 == 0 ? kBlank : target[s / 2];
  };
  std::vector<double> alpha(states, kLogZero);
  std::vector<double> next(states);
  alpha[0] = logprobs(0, kBlank);
  if (states > 1) alpha[1] = logprobs(0, label(1));
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < states; ++s) {
      double a = alpha[s];
      if (s >= 1) a = LogAdd(a, alpha[s - 1]);
      if (s >= 2 && label(s) != kBlank && label(s) != label(s - 2)) {
        a = LogAdd(a, alpha[s - 2]);
      }
      next[s] = a == kLogZero ? kLogZero : a + logprobs(t, label(s));
    }
    alpha.swap(next);
  }
  double total = alpha[states - 1];
  if (states > 1) total = LogAdd(total, alpha[states - 2]);
  return -total;
}

double HybridLoss(double ctc_nll, double att_nll, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error("loss weight must lie in [0, 1]");
  }
  // A zero weight drops its term, so an infinite loss there cannot poison
  // the sum.
  double loss = 0;
  if (alpha > 0) loss += alpha * ctc_nll;
  if (alpha < 1) loss += (1 - alpha) * att_nll;
  return loss;
}

CtcPrefixScorer::CtcPrefixScorer(const LogProbMatrix& logprobs)
    : logprobs_(logprobs) {
  if (logprobs_.frames() == 0) throw Error("log-prob matrix has no frames");
}

CtcPrefixScorer::State CtcPrefixScorer::Initial() const {
  const std::size_t frames = logprobs_.frames();
  State s;
  s.r_nonblank.assign(frames, kLogZero);
  s.r_blank.resize(frames);
  double acc = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    acc += logprobs_(t, kBlank);
    s.r_blank[t] = acc;
  }
  s.prefix_logp = 0;
  return s;
}

CtcPrefixScorer::State CtcPrefixScorer::Extend(const State& state,
                                               int token) const {
  const std::size_t frames = logprobs_.frames();
  if (token <= kBlank || static_cast<std::size_t>(token) >= logprobs_.vocab()) {
    throw Error("cannot extend a prefix with label " + std::to_string(token));
  }
  const bool repeat = !state.prefix.empty() && state.prefix.back() == token;

  // phi(t): mass of the old prefix at t that may be followed by a fresh
  // emission of `token`. A repeated label needs an intervening blank.
  auto phi = [&](std::size_t t) {
    return repeat ? state.r_blank[t]
                  : LogAdd(state.r_blank[t], state.r_nonblank[t]);
  };

  State out;
  out.prefix = state.prefix;
  out.prefix.push_back(token);
  out.r_nonblank.assign(frames, kLogZero);
  out.r_blank.assign(frames, kLogZero);

  double psi = kLogZero;
  if (state.prefix.empty()) {
    out.r_nonblank[0] = logprobs_(0, token);
    psi = out.r_nonblank[0];
  }
  for (std::size_t t = 1; t < frames; ++t) {
    const double x = logprobs_(t, token);
    const double p = phi(t - 1);
    const double rn = LogAdd(out.r_nonblank[t - 1], p);
    out.r_nonblank[t] = rn == kLogZero ? kLogZero : rn + x;
    const double rb = LogAdd(out.r_blank[t - 1], out.r_nonblank[t - 1]);
    out.r_blank[t] = rb == kLogZero ? kLogZero : rb + logprobs_(t, kBlank);
    if (p != kLogZero) psi = LogAdd(psi, p + x);
  }
  out.prefix_logp = psi;
  return out;
}

double CtcPrefixScorer::FinalLogProb(const State& state) const {
  const std::size_t last = logprobs_.frames() - 1;
  return LogAdd(state.r_nonblank[last], state.r_blank[last]);
}

double CtcPrefixScorer::PrefixLogProb(std::span<const int> prefix) const {
  State s = Initial();
  for (int token : prefix) s = Extend(s, token);
  return s.prefix_logp;
}

}  // namespace phonekit
