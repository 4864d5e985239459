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

#ifndef SURVONS_LIKELIHOOD_HPP
#define SURVONS_LIKELIHOOD_HPP

#include <span>
#include <vector>

#include <Eigen/Core>

#include "survons/cohort.hpp"

namespace survons {

/// Exponent magnitude above which exp(theta^T x) is reported as overflow.
inline constexpr double kMaxLinearPredictor = 700.0;

/// A point of the parameter domain, the Euclidean ball of radius `radius`.
struct Parameter {
  Eigen::VectorXd theta;
  double radius = 1.0;

  Parameter() = default;
  Parameter(Eigen::VectorXd theta_in, double radius_in);
};

/// Constant stretch of covariates inside one exposure window.
struct ExposurePiece {
  double length = 0.0;
  Eigen::VectorXd x;
};

/// One at-risk individual on one interval.
struct LossEntry {
  bool event = false;
  /// x(u), the left-continuous path value at the observed time.
  Eigen::VectorXd event_covariate;
  double start = 0.0;
  double end = 0.0;
  std::vector<ExposurePiece> pieces;
};

/// Everything needed to evaluate the loss on (t-1, t].
struct LossContext {
  int t = 1;
  std::vector<LossEntry> entries;
  Eigen::Index dim = 0;

  bool empty() const { return entries.empty(); }
};

LossEntry make_loss_entry(const Individual& ind, const IntervalExposure& e);
/// Built from risk_set(cohort, t) in the same order.
LossContext make_loss_context(const Cohort& cohort, int t);
/// Contexts for t = 1..n.
std::vector<LossContext> make_loss_contexts(const Cohort& cohort, int n);

/// Negative log-likelihood on one interval.
double interval_loss(const LossContext& ctx, const Eigen::VectorXd& theta);
Eigen::VectorXd interval_gradient(const LossContext& ctx,
                                  const Eigen::VectorXd& theta);
Eigen::MatrixXd interval_hessian(const LossContext& ctx,
                                 const Eigen::VectorXd& theta);

struct LossDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Value, gradient and (if `with_hessian`) Hessian in one pass over the
/// entries. Works on any list of entries, including several intervals pooled.
LossDerivatives evaluate_loss(std::span<const LossEntry> entries,
                              Eigen::Index dim, const Eigen::VectorXd& theta,
                              bool with_hessian = true);

/// sum_{t=1}^n interval_loss(t). n >= 1.
double cumulative_loss(const Cohort& cohort, const Eigen::VectorXd& theta,
                       int n);

struct BatchMinimizerOptions {
  double tol = 1e-8;
  int max_iterations = 200;
};

struct BatchMinimizerResult {
  Parameter parameter;
  double loss = 0.0;
  /// ||theta - Proj(theta - grad)||.
  double residual = 0.0;
  int iterations = 0;
};

/// Minimizer of the cumulative loss over the radius-D ball, starting from the
/// origin. Throws ConvergenceError at the iteration cap.
BatchMinimizerResult batch_minimizer(const Cohort& cohort, int n,
                                     double radius,
                                     const BatchMinimizerOptions& options = {});
BatchMinimizerResult batch_minimizer(std::span<const LossContext> contexts,
                                     Eigen::Index dim, double radius,
                                     const BatchMinimizerOptions& options = {});

}  // namespace survons

#endif  // SURVONS_LIKELIHOOD_HPP
