// Copyright 2026 The pbpc Authors.
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
#include <vector>

namespace pbpc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Total supply cannot cover the unit demand.
class InfeasibleInstance : public Error {
 public:
  using Error::Error;
};

// A search or expectation would exceed its configured work budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Bad index, bid, parameter or option.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Carries every problem found, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "validation failed";
    for (const auto& p : problems) out += "\n  - " + p;
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace pbpc
