// Copyright 2026 The crowdbench Authors.
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

namespace crowdbench {

// Categories map onto CLI exit codes: validation problems exit 2,
// estimation problems exit 3.
enum class ErrorKind {
  kParse,
  kValidation,
  kKernel,
  kEstimation,
  kIo,
  kRemote,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error parse_error(const std::string& what) {
  return Error(ErrorKind::kParse, what);
}
inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::kValidation, what);
}
inline Error kernel_error(const std::string& what) {
  return Error(ErrorKind::kKernel, what);
}
inline Error estimation_error(const std::string& what) {
  return Error(ErrorKind::kEstimation, what);
}
inline Error io_error(const std::string& what) {
  return Error(ErrorKind::kIo, what);
}
inline Error remote_error(const std::string& what) {
  return Error(ErrorKind::kRemote, what);
}

}  // namespace crowdbench
