// Copyright 2026 The dicke-trajectories Authors
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

#ifndef DICKE__ERRORS_HPP_
#define DICKE__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dicke
{

/// Base of every error thrown by the library. `exit_code()` is the process
/// status the command-line tool reports for it.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept {return 1;}
};

/// Invalid input: bad rates, out-of-range occupations, malformed configs.
class ValidationError : public Error
{
public:
  using Error::Error;
  int exit_code() const noexcept override {return 1;}
};

/// A numerical result could not be produced to the requested accuracy.
class NumericalError : public Error
{
public:
  using Error::Error;
  int exit_code() const noexcept override {return 2;}
};

/// Accumulated rounding exceeds the requested accuracy at the configured
/// floating-point precision.
class PrecisionError : public NumericalError
{
public:
  PrecisionError(const std::string & what, double bound, int precision_bits)
  : NumericalError(what), bound_(bound), precision_bits_(precision_bits) {}

  double bound() const noexcept {return bound_;}
  int precision_bits() const noexcept {return precision_bits_;}

private:
  double bound_;
  int precision_bits_;
};

/// Integral or limit that does not exist (e.g. a non-decaying term).
class DivergenceError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

/// Adaptive integration failed to meet its tolerance or horizon.
class IntegratorError : public NumericalError
{
public:
  IntegratorError(const std::string & what, double achieved_error)
  : NumericalError(what), achieved_error_(achieved_error) {}

  double achieved_error() const noexcept {return achieved_error_;}

private:
  double achieved_error_;
};

/// A configured size cap (lattice states, Hilbert dimension) was exceeded.
class ResourceError : public Error
{
public:
  using Error::Error;
  int exit_code() const noexcept override {return 3;}
};

}  // namespace dicke

#endif  // DICKE__ERRORS_HPP_
