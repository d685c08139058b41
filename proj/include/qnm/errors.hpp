// Copyright 2026 The qnmlab Authors
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

#ifndef QNM_ERRORS_HPP
#define QNM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qnm {

/// Base class of every exception thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unknown or duplicated register label, or incompatible layouts.
struct LayoutError : Error {
    using Error::Error;
};

/// Matrix/vector shapes that do not fit together.
struct DimensionMismatch : Error {
    using Error::Error;
};

/// A state, channel or unitary that violates its numerical invariants.
struct InvalidState : Error {
    using Error::Error;
};

/// Scheme parameters that violate a documented constraint.
struct InvalidParams : Error {
    using Error::Error;
};

/// A register that was required to be classical carries coherences.
struct NotClassical : Error {
    using Error::Error;
};

/// Conditioning on an event of probability zero.
struct ZeroProbability : Error {
    using Error::Error;
};

/// Requested object is too large for dense or exhaustive treatment.
struct SizeLimitExceeded : Error {
    using Error::Error;
};

/// Malformed configuration or serialized input.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace qnm

#endif  // QNM_ERRORS_HPP
