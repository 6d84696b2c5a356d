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

#include "phonekit/feature_table.h"

#include <fstream>
#include <sstream>

#include "phonekit/error.h"
#include "phonekit/unicode.h"

namespace phonekit {

// Defined in the generated embedded_features.cc.
extern const char* const kEmbeddedFixtureTable;

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cells.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cells;
}

}  // namespace

char TernarySymbol(Ternary v) {
  switch (v) {
    case Ternary::kMinus:
      return '-';
    case Ternary::kZero:
      return '0';
    case Ternary::kPlus:
      return '+';
  }
  return '0';
}

FeatureVector::FeatureVector(Values values,
                             std::shared_ptr<const FeatureNames> names)
    : values_(values), names_(std::move(names)) {
  if (!names_ || names_->size() != kFeatureCount) {
    throw Error("feature vector needs exactly 24 feature names");
  }
}

Ternary FeatureVector::Get(std::string_view name) const {
  for (std::size_t i = 0; i < names_->size(); ++i) {
    if ((*names_)[i] == name) return values_[i];
  }
  throw Error("unknown feature '" + std::string(name) + "'");
}

FeatureTable FeatureTable::Load(std::istream& in,
                                std::vector<TableWarning>* warnings) {
  auto warn = [&](std::size_t row, std::string message) {
    if (warnings) warnings->push_back({row, std::move(message)});
  };

  FeatureTable table;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = SplitTabs(line);
    const std::string where = "feature table row " + std::to_string(row);

    if (!have_header) {
      if (cells[0] != "segment" && cells[0] != "ipa") {
        throw Error(where + ": header must start with 'segment'");
      }
      if (cells.size() != kFeatureCount + 1) {
        throw Error(where + ": expected 24 features, found " +
                    std::to_string(cells.size() - 1));
      }
      table.names_ = std::make_shared<const FeatureNames>(cells.begin() + 1,
                                                          cells.end());
      have_header = true;
      continue;
    }

    if (cells.size() != kFeatureCount + 1) {
      throw Error(where + ": expected 25 columns, found " +
                  std::to_string(cells.size()));
    }
    FeatureVector::Values values{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const std::string& v = cells[i + 1];
      if (v == "+") {
        values[i] = Ternary::kPlus;
      } else if (v == "-") {
        values[i] = Ternary::kMinus;
      } else if (v == "0") {
        values[i] = Ternary::kZero;
      } else {
        throw Error(where + ": value '" + v + "' for feature '" +
                    (*table.names_)[i] + "' is not one of +, -, 0");
      }
    }

    std::string key = cells[0];
    if (!IsNfd(key)) {
      const std::string normalized = NormalizeNfd(key);
      warn(row, "segment '" + key + "' normalized to NFD");
      key = normalized;
    }
    try {
      key = PhoneToken::FromSurface(key).surface();
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
    if (table.entries_.contains(key)) {
      warn(row, "duplicate segment '" + key + "', keeping the last row");
      table.entries_.erase(key);
    }
    table.entries_.emplace(key, FeatureVector(values, table.names_));
  }
  if (!have_header) throw Error("feature table is empty");
  return table;
}

FeatureTable FeatureTable::LoadFile(const std::string& path,
                                    std::vector<TableWarning>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature table '" + path + "'");
  return Load(in, warnings);
}

const FeatureTable& FeatureTable::Fixture() {
  static const FeatureTable table = [] {
    std::istringstream in(kEmbeddedFixtureTable);
    return Load(in);
  }();
  return table;
}

bool FeatureTable::Contains(std::string_view surface) const {
  return entries_.find(surface) != entries_.end();
}

LookupResult FeatureTable::Lookup(const PhoneToken& phone,
                                  LookupFallback fallback) const {
  if (auto it = entries_.find(phone.surface()); it != entries_.end()) {
    return {it->second, false, it->first};
  }
  if (fallback == LookupFallback::kStripMarks) {
    std::u32string scalars = phone.scalars();
    while (scalars.size() > 1) {
      scalars.pop_back();
      if (auto it = entries_.find(EncodeUtf8(scalars)); it != entries_.end()) {
        return {it->second, true, it->first};
      }
    }
  }
  throw UnknownPhoneError(phone.surface());
}

void FeatureTable::Save(std::ostream& out) const {
  out << "segment";
  for (const std::string& name : *names_) out << '\t' << name;
  out << '\n';
  for (const auto& [key, vec] : entries_) {
    out << key;
    for (Ternary v : vec.values()) out << '\t' << TernarySymbol(v);
    out << '\n';
  }
}

Rational PhoneDistance(const FeatureVector& a, const FeatureVector& b) {
  if (a.shared_names() != b.shared_names() && a.names() != b.names()) {
    throw Error("feature vectors come from tables with different headers");
  }
  std::int64_t differing = 0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (a[i] != b[i]) ++differing;
  }
  return Rational(differing, static_cast<std::int64_t>(kFeatureCount));
}

}  // namespace phonekit
