// Copyright 2026 The SurvONS Authors.
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

#ifndef SURVONS_ERROR_HPP
#define SURVONS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace survons {

/// Bad user input: dimensions, ranges, malformed config. Maps to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure during a computation. Maps to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |theta^T x| exceeded the exp overflow guard.
class OverflowError : public NumericalError {
 public:
  OverflowError(const std::string& what, double linear_predictor)
      : NumericalError(what), linear_predictor_(linear_predictor) {}
  double linear_predictor() const { return linear_predictor_; }

 private:
  double linear_predictor_;
};

/// Iterative solver hit its iteration cap. Carries the last iterate and the
/// stationarity residual it reached.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate,
                   double residual)
      : NumericalError(what),
        last_iterate_(std::move(last_iterate)),
        residual_(residual) {}
  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd last_iterate_;
  double residual_;
};

/// Root finding for the Mahalanobis projection multiplier failed; reports the
/// final bracket on the multiplier.
class ProjectionError : public NumericalError {
 public:
  ProjectionError(const std::string& what, double nu_lo, double nu_hi)
      : NumericalError(what), nu_lo_(nu_lo), nu_hi_(nu_hi) {}
  double nu_lo() const { return nu_lo_; }
  double nu_hi() const { return nu_hi_; }

 private:
  double nu_lo_;
  double nu_hi_;
};

/// Writes a warning line to standard error. Kept in one place so tests can
/// silence it.
void log_warning(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace survons

#endif  // SURVONS_ERROR_HPP
