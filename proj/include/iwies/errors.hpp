// Copyright 2026 The iwies Authors.
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

#include <stdexcept>
#include <string>

namespace iwies {

/// Broad failure classes. The CLI maps each one to a distinct exit code.
enum class ErrorCategory {
  Input = 10,        // shape / dimension / non-finite input
  Parse = 11,        // malformed text (checkpoint, config, packet, task)
  Sampling = 12,     // rejection sampling exhausted
  Protocol = 13,     // missing or out-of-order scalar packets
  Io = 14,           // filesystem failures
  Determinism = 15,  // worker-count invariance violated
  Config = 16,       // invalid configuration values
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

inline Error input_error(const std::string& what) {
  return Error(ErrorCategory::Input, what);
}

inline Error parse_error(const std::string& what) {
  return Error(ErrorCategory::Parse, what);
}

inline Error config_error(const std::string& what) {
  return Error(ErrorCategory::Config, what);
}

}  // namespace iwies
