// Copyright 2026 The qscmc Authors
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

#ifndef QSCMC_ERROR_HPP
#define QSCMC_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qscmc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch, non-Hermitian matrix, out-of-range argument.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Covariance matrix is not positive definite.
class InvalidCovariance : public Error {
 public:
  using Error::Error;
};

/// Distribution parameter outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Measurement is not a valid or informationally complete POM.
class InvalidPom : public Error {
 public:
  using Error::Error;
};

/// All importance weights vanished. Carries the bridge step and the ESS trace so far.
class DegenerateEnsemble : public Error {
 public:
  DegenerateEnsemble(std::size_t step, std::vector<double> ess_trace)
      : Error("degenerate ensemble at bridge step " + std::to_string(step)),
        step_(step),
        ess_trace_(std::move(ess_trace)) {}

  std::size_t step() const noexcept { return step_; }
  const std::vector<double>& ess_trace() const noexcept { return ess_trace_; }

 private:
  std::size_t step_;
  std::vector<double> ess_trace_;
};

/// Region average g is non-positive somewhere on the integration path.
class SingularIntegrand : public Error {
 public:
  explicit SingularIntegrand(double lambda)
      : Error("non-positive region average at lambda = " + std::to_string(lambda)), lambda_(lambda) {}

  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

/// The calibration region holds too small a fraction of the uniform sample.
class AnchorTooDeep : public Error {
 public:
  AnchorTooDeep(double lambda0, double fraction)
      : Error("calibration fraction " + std::to_string(fraction) + " at log10(lambda0) = " +
              std::to_string(lambda0) + " is below 0.1%; choose a smaller lambda0"),
        fraction_(fraction) {}

  double fraction() const noexcept { return fraction_; }

 private:
  double fraction_;
};

/// A sample handed to a region average contains points outside the region.
class InvalidSample : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Run configuration failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qscmc

#endif  // QSCMC_ERROR_HPP
