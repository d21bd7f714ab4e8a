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

#include "spliceloc/error.hpp"

namespace spliceloc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Contract: return "contract violation";
    case ErrorKind::Checkpoint: return "checkpoint error";
    case ErrorKind::Subprocess: return "subprocess error";
    case ErrorKind::Degenerate: return "degenerate input";
    case ErrorKind::Resolution: return "unresolved asset";
    case ErrorKind::Numeric: return "numeric error";
  }
  return "error";
}

}  // namespace spliceloc
