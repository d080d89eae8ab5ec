// Copyright 2026 The ratecon Authors.
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

namespace ratecon {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension or column mismatch between a model, a problem and a dataset.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A precondition on an argument was violated (e.g. lambda off the simplex).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A rate constraint whose denominator group is empty on the given data.
class UndefinedConstraintError : public Error {
 public:
  UndefinedConstraintError(const std::string& constraint, const std::string& what)
      : Error("constraint '" + constraint + "' undefined: " + what), constraint_(constraint) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

// Iterative numerics failed to converge or produced non-finite values.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A construction would exceed a configured size cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (CSV, JSON config, checkpoint, dataset cache).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ratecon
