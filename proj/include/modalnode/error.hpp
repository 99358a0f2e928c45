// Copyright 2026 The modalnode Authors
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

#ifndef MODALNODE_ERROR_HPP_
#define MODALNODE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modalnode {

// Violated precondition or malformed configuration value.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a rollout produces a non-finite state component.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error("divergence at step " + std::to_string(step) +
                           ": " + what),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Linear Verlet stability bound violated without an explicit override.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Truncated, corrupted or version-mismatched file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace modalnode

#endif  // MODALNODE_ERROR_HPP_
