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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phonekit/rational.h"

namespace phonekit {

// Operations are named from the reference's point of view, as in WER
// scoring: kDelete is a reference unit missing from the hypothesis, kInsert
// an extra hypothesis unit. A zero-cost substitution is reported as kMatch.
enum class EditKind : std::uint8_t { kMatch, kSubstitute, kDelete, kInsert };

struct EditOp {
  EditKind kind;
  Rational cost;
  std::ptrdiff_t hyp_index;  // -1 for kDelete
  std::ptrdiff_t ref_index;  // -1 for kInsert

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct AlignmentResult {
  Rational cost;
  std::vector<EditOp> ops;  // in sequence order
};

const char* EditKindName(EditKind kind);

// Minimal-cost alignment of `hyp` against `ref`. `subst(h, r)` must return a
// cost in [0, ins + del]. Among equal-cost predecessors the traceback prefers
// match/substitute, then delete, then insert, so traces are reproducible.
template <class Hyp, class Ref, class SubstCost>
AlignmentResult WeightedEditDistance(std::span<const Hyp> hyp,
                                     std::span<const Ref> ref,
                                     SubstCost&& subst, Rational ins_cost,
                                     Rational del_cost) {
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();
  const std::size_t width = m + 1;
  enum : std::uint8_t { kDiag, kLeft, kUp };  // sub, delete, insert

  std::vector<Rational> cost((n + 1) * width);
  std::vector<Rational> sub_cost((n + 1) * width);
  std::vector<std::uint8_t> back((n + 1) * width, kDiag);
  auto at = [width](std::size_t i, std::size_t j) { return i * width + j; };

  for (std::size_t j = 1; j <= m; ++j) {
    cost[at(0, j)] = cost[at(0, j - 1)] + del_cost;
    back[at(0, j)] = kLeft;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    cost[at(i, 0)] = cost[at(i - 1, 0)] + ins_cost;
    back[at(i, 0)] = kUp;
    for (std::size_t j = 1; j <= m; ++j) {
      const Rational s = subst(hyp[i - 1], ref[j - 1]);
      sub_cost[at(i, j)] = s;
      Rational best = cost[at(i - 1, j - 1)] + s;
      std::uint8_t move = kDiag;
      const Rational left = cost[at(i, j - 1)] + del_cost;
      if (left < best) {
        best = left;
        move = kLeft;
      }
      const Rational up = cost[at(i - 1, j)] + ins_cost;
      if (up < best) {
        best = up;
        move = kUp;
      }
      cost[at(i, j)] = best;
      back[at(i, j)] = move;
    }
  }

  AlignmentResult result;
  result.cost = cost[at(n, m)];
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    switch (back[at(i, j)]) {
      case kDiag: {
        const Rational s = sub_cost[at(i, j)];
        result.ops.push_back({s.numerator() == 0 ? EditKind::kMatch : EditKind::kSubstitute,
                              s, static_cast<std::ptrdiff_t>(i - 1),
                              static_cast<std::ptrdiff_t>(j - 1)});
        --i;
        --j;
        break;
      }
      case kLeft:
        result.ops.push_back(
            {EditKind::kDelete, del_cost, -1, static_cast<std::ptrdiff_t>(j - 1)});
        --j;
        break;
      default:
        result.ops.push_back(
            {EditKind::kInsert, ins_cost, static_cast<std::ptrdiff_t>(i - 1), -1});
        --i;
        break;
    }
  }
  std::reverse(result.ops.begin(), result.ops.end());
  return result;
}

// Unit-cost variant over anything comparable with ==.
template <class T>
AlignmentResult UnitEditDistance(std::span<const T> hyp, std::span<const T> ref) {
  return WeightedEditDistance<T, T>(
      hyp, ref,
      [](const T& a, const T& b) { return a == b ? Rational(0) : Rational(1); },
      Rational(1), Rational(1));
}

}  // namespace phonekit
