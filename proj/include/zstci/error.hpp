// Copyright 2026 The ZSTCI Lab Authors. All Rights Reserved.
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

namespace zstci {

// Every failure raised by the library carries one of these categories. The
// CLI maps them onto process exit codes.
enum class ErrorCategory {
  kDimension,
  kNumeric,
  kConfig,
  kFormat,
  kData,
  kProtocol,
  kAggregation,
};

const char* to_string(ErrorCategory category);

// Exit code used by the CLI for a given category (0 is success, 1 is
// reserved for unexpected failures).
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define ZSTCI_DEFINE_ERROR(Name, Category)                                \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& message) : Error(Category, message) {} \
  };

ZSTCI_DEFINE_ERROR(DimensionError, ErrorCategory::kDimension)
ZSTCI_DEFINE_ERROR(NumericError, ErrorCategory::kNumeric)
ZSTCI_DEFINE_ERROR(ConfigError, ErrorCategory::kConfig)
ZSTCI_DEFINE_ERROR(FormatError, ErrorCategory::kFormat)
ZSTCI_DEFINE_ERROR(DataError, ErrorCategory::kData)
ZSTCI_DEFINE_ERROR(ProtocolError, ErrorCategory::kProtocol)
ZSTCI_DEFINE_ERROR(AggregationError, ErrorCategory::kAggregation)

#undef ZSTCI_DEFINE_ERROR

}  // namespace zstci
