// Copyright 2026 The disprod Authors
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

namespace disprod {

// Bad dimensions, unknown names, invalid parameter values.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A guarded elementary function was evaluated outside its domain
// (division by ~0, log/sqrt of a non-positive argument).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Non-finite partials or moments encountered while building the
// propagation graph. The message names the offending coordinate or depth.
class PropagationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed experiment config or map file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace disprod
