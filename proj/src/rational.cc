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

#include "phonekit/rational.h"

#include <algorithm>

namespace phonekit {

namespace {

std::string ToString(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

}  // namespace

std::string ToDecimal(const Rational& r, int digits) {
  const bool negative = r.numerator() < 0;
  unsigned __int128 num = static_cast<unsigned __int128>(
      negative ? -static_cast<__int128>(r.numerator()) : r.numerator());
  const auto den = static_cast<unsigned __int128>(r.denominator());
  unsigned __int128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  // Round half up on the magnitude.
  const unsigned __int128 scaled = (num * scale * 2 + den) / (den * 2);
  const unsigned __int128 whole = scaled / scale;
  std::string out = negative && scaled != 0 ? "-" : "";
  out += ToString(whole);
  if (digits > 0) {
    std::string frac = ToString(scaled % scale);
    out += '.';
    out += std::string(static_cast<std::size_t>(digits) - frac.size(), '0');
    out += frac;
  }
  return out;
}

std::string ToFraction(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace phonekit
