// Copyright 2026 The pathqp Authors
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

namespace pathqp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand lengths or matrix shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Some lower bound exceeds its upper bound.
class InfeasibleBoundsError : public Error {
 public:
  using Error::Error;
};

/// A sparse matrix does not match the pattern descriptor it is paired with.
class DescriptorError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-contract user input (files, parameters, waypoints).
class InputError : public Error {
 public:
  using Error::Error;
};

/// No collision-free lattice path exists.
class SearchFailure : public Error {
 public:
  using Error::Error;
};

/// The free corridor around the reference is narrower than the vehicle.
class InfeasibleCorridorError : public Error {
 public:
  using Error::Error;
};

/// The variable layout does not have the locality a structured kernel needs.
class LayoutError : public Error {
 public:
  using Error::Error;
};

/// Jacobi preconditioner with a zero or negative entry.
class PreconditionerError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity produced inside an iterative solver.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace detail
}  // namespace pathqp
