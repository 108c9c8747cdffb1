// Copyright 2026 The hitl-workbench Authors.
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

#ifndef HITL_ERRORS_H_
#define HITL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace hitl {

// Invalid dimensions, probabilities or option values.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A caller broke an operation's precondition (shape mismatch, stepping a
// finished episode, empty input where one is required).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what)
      : std::logic_error(what) {}
};

// Maze generation exhausted its retry budget.
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace hitl

#endif  // HITL_ERRORS_H_
