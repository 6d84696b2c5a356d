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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phonekit {

// Domain/validation failure. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written. The CLI maps these to exit 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ill-formed UTF-8. `position` is the byte offset of the offending unit.
class EncodingError : public Error {
 public:
  EncodingError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Text that cannot be segmented into phone tokens. `index` is the scalar
// (code point) index into the NFD-normalized input.
class TokenizeError : public Error {
 public:
  TokenizeError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class UnknownPhoneError : public Error {
 public:
  explicit UnknownPhoneError(const std::string& surface)
      : Error("unknown phone: " + surface), surface_(surface) {}
  const std::string& surface() const { return surface_; }

 private:
  std::string surface_;
};

}  // namespace phonekit
