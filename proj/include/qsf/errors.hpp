// Copyright 2026 The QSF Authors
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

namespace qsf {

/// Invalid sizes, ranges or shape mismatches in model/circuit configuration.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Qubit or tensor index outside the valid range.
class IndexError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Malformed, missing or non-finite input data.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An object was used before it reached the required state (e.g. unfitted scaler).
class StateError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Training diverged or produced non-finite values.
class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace qsf
