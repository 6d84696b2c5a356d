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

// Articulatory feature table: phone surface -> 24 ternary features, in the
// PanPhon segment-table layout (header "segment" + 24 names, values +/-/0).

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "phonekit/ipa.h"
#include "phonekit/rational.h"

namespace phonekit {

inline constexpr std::size_t kFeatureCount = 24;

enum class Ternary : signed char { kMinus = -1, kZero = 0, kPlus = 1 };

char TernarySymbol(Ternary v);

using FeatureNames = std::vector<std::string>;

class FeatureVector {
 public:
  using Values = std::array<Ternary, kFeatureCount>;

  FeatureVector(Values values, std::shared_ptr<const FeatureNames> names);

  const Values& values() const { return values_; }
  Ternary operator[](std::size_t i) const { return values_[i]; }
  const FeatureNames& names() const { return *names_; }
  const std::shared_ptr<const FeatureNames>& shared_names() const {
    return names_;
  }

  // Value of the named feature; throws Error if the name is unknown.
  Ternary Get(std::string_view name) const;

  friend bool operator==(const FeatureVector& a, const FeatureVector& b) {
    return a.values_ == b.values_ && *a.names_ == *b.names_;
  }

 private:
  Values values_;
  std::shared_ptr<const FeatureNames> names_;
};

enum class LookupFallback {
  kError,       // exact match or UnknownPhoneError
  kStripMarks,  // drop trailing marks one at a time until a key matches
};

struct LookupResult {
  FeatureVector vector;
  bool degraded = false;    // matched only after stripping marks
  std::string matched_key;  // surface that was found in the table
};

struct TableWarning {
  std::size_t row = 0;  // 1-based line number, header is row 1
  std::string message;
};

class FeatureTable {
 public:
  // Parses the TSV layout. Throws Error with the row number on malformed
  // rows; duplicates (last wins) and non-NFD keys are reported as warnings.
  static FeatureTable Load(std::istream& in,
                           std::vector<TableWarning>* warnings = nullptr);
  static FeatureTable LoadFile(const std::string& path,
                               std::vector<TableWarning>* warnings = nullptr);

  // Small table of segments copied from the published PanPhon segment table.
  static const FeatureTable& Fixture();

  const FeatureNames& feature_names() const { return *names_; }
  std::size_t size() const { return entries_.size(); }
  bool Contains(std::string_view surface) const;
  const std::map<std::string, FeatureVector, std::less<>>& entries() const {
    return entries_;
  }

  LookupResult Lookup(const PhoneToken& phone,
                      LookupFallback fallback = LookupFallback::kError) const;

  // Writes the same TSV layout; Load(Save(t)) == t.
  void Save(std::ostream& out) const;

  friend bool operator==(const FeatureTable& a, const FeatureTable& b) {
    return *a.names_ == *b.names_ && a.entries_ == b.entries_;
  }

 private:
  std::shared_ptr<const FeatureNames> names_;
  std::map<std::string, FeatureVector, std::less<>> entries_;
};

// Number of differing positions over 24. Throws Error when the vectors come
// from tables with different feature headers.
Rational PhoneDistance(const FeatureVector& a, const FeatureVector& b);

}  // namespace phonekit
