// Copyright 2026 The rsd Authors.
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

namespace rsd {

enum class ErrorKind {
  kInput,      // caller passed arguments violating a precondition
  kStructure,  // malformed draft / mask / distribution layout
  kConfig,     // bad experiment configuration or unreadable input path
  kData,       // well-formed file with invalid content
  kIo,
};

// Single exception type for the core; the C boundary maps kind() to a status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_input(const std::string& what) {
  throw Error(ErrorKind::kInput, what);
}
[[noreturn]] inline void throw_structure(const std::string& what) {
  throw Error(ErrorKind::kStructure, what);
}
[[noreturn]] inline void throw_config(const std::string& what) {
  throw Error(ErrorKind::kConfig, what);
}
[[noreturn]] inline void throw_data(const std::string& what) {
  throw Error(ErrorKind::kData, what);
}
[[noreturn]] inline void throw_io(const std::string& what) {
  throw Error(ErrorKind::kIo, what);
}

}  // namespace rsd
