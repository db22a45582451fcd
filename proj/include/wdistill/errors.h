// Copyright 2026 The wdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WDISTILL_ERRORS_H
#define WDISTILL_ERRORS_H

#include <stdexcept>
#include <string>

namespace wdistill {

/// Bad argument: wrong dimension, out-of-range index or parameter.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input is outside the numerical domain of an operation (non-PSD, singular).
struct NumericalDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A state that cannot be measured or renormalized.
struct InvalidState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operation precondition on the register contents is violated.
struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

struct UnsupportedError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Protocol or run configuration is inconsistent.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Recorded probabilities or tables are inconsistent or incomplete.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A statistical estimate has no data behind it.
struct UndefinedEstimate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wdistill

#endif
