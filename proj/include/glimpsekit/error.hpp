// Copyright 2026 The GlimpseKit Authors.
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

#ifndef GLIMPSEKIT_ERROR_HPP
#define GLIMPSEKIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gk {

enum class ErrorCode {
  invalid_argument,
  out_of_range,
  io,
  parse,
  validation,
};

// All library failures surface as gk::Error. `field()` names the offending
// input location (e.g. "objects[3].w") when one exists, otherwise it is empty.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        code_(code),
        field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

  // Same error with `context` (a file name, scene id, ...) prepended to the
  // message.
  Error prefixed(const std::string& context) const { return Error(code_, field_, context + ": " + what(), 0); }

 private:
  Error(ErrorCode code, std::string field, const std::string& full_message, int)
      : std::runtime_error(full_message), code_(code), field_(std::move(field)) {}

  ErrorCode code_;
  std::string field_;
};

}  // namespace gk

#endif  // GLIMPSEKIT_ERROR_HPP
