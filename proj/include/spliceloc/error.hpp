// ----------------------------------------------------------------------------
// Copyright 2026 The spliceloc Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace spliceloc {

enum class ErrorKind {
  InvalidArgument,
  Format,       // malformed file contents
  Unsupported,  // well-formed but unsupported encoding
  Io,
  Contract,     // violated precondition (shape mismatch, over-length input, ...)
  Checkpoint,
  Subprocess,
  Degenerate,   // mathematically undefined input (e.g. silent signal for SNR)
  Resolution,   // asset referenced by a spec cannot be found
  Numeric,      // non-finite values during optimization
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::Contract, what);
}

}  // namespace spliceloc
