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

#include <boost/rational.hpp>

#include <cstdint>
#include <string>

namespace phonekit {

// Edit costs are multiples of 1/24, so every distance and every corpus total
// is kept exact. Conversion to decimal happens only when a report is written.
using Rational = boost::rational<std::int64_t>;

inline double ToDouble(const Rational& r) {
  return static_cast<double>(r.numerator()) /
         static_cast<double>(r.denominator());
}

// Rounded half-up decimal with `digits` fractional digits ("0.041667").
std::string ToDecimal(const Rational& r, int digits = 6);

// "1/24", or "3" when the denominator is 1.
std::string ToFraction(const Rational& r);

}  // namespace phonekit
