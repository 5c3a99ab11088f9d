// Copyright 2026 The diqkd authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Exception hierarchy shared by all modules. Domain and parse errors map to
 * CLI exit code 1, numeric failures to exit code 2.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace diqkd {

/// Invalid argument, violated precondition, or out-of-domain input.
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file or config entry.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Structurally valid file whose contents violate a schema constraint.
class SchemaError : public ParseError {
  public:
    using ParseError::ParseError;
};

/// A required count is zero or data is otherwise insufficient to estimate.
class InsufficientDataError : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Iteration cap reached or other numeric breakdown.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace diqkd
