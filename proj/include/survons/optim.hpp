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

#ifndef SURVONS_OPTIM_HPP
#define SURVONS_OPTIM_HPP

#include <vector>

#include <Eigen/Core>

#include "survons/concavity.hpp"
#include "survons/likelihood.hpp"

namespace survons {

/// Euclidean projection onto {||theta|| <= radius}.
Eigen::VectorXd project_ball(const Eigen::VectorXd& theta, double radius);

struct ProjectionResult {
  Eigen::VectorXd theta;
  /// Multiplier of the norm constraint; 0 when inactive.
  double nu = 0.0;
  bool active = false;
  /// max of the relative stationarity residual ||A(theta - target) + nu theta||
  /// and the relative boundary error | ||theta|| - D | / D.
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// argmin (theta - target)^T A (theta - target) over the radius ball, via
/// theta(nu) = (A + nu I)^{-1} A target and a safeguarded Newton search for
/// ||theta(nu)|| = radius. Throws ProjectionError at the iteration cap.
ProjectionResult project_mahalanobis(const Eigen::VectorXd& target,
                                     const Eigen::MatrixXd& a, double radius,
                                     double tol = 1e-12,
                                     int max_iterations = 200);

/// One Online Newton Step learner.
struct OnsState {
  Eigen::VectorXd theta;
  Eigen::MatrixXd a;
  Eigen::MatrixXd a_inv;
  double learning_rate = 1.0;
  /// 1 / (learning_rate * radius)^2 unless set explicitly.
  double epsilon = 1.0;
  double radius = 1.0;

  /// theta = 0, A = epsilon I.
  static OnsState initial(Eigen::Index dim, double learning_rate, double radius);
  static OnsState initial(Eigen::Index dim, double learning_rate, double radius,
                          double epsilon);
};

/// A += g g^T, Sherman-Morrison update of A^{-1}, then the A-metric projection
/// of theta - A^{-1} g / gamma.
OnsState ons_step(OnsState state, const Eigen::VectorXd& g);

struct OgdState {
  Eigen::VectorXd theta;
  double gradient_bound = 1.0;
  double radius = 1.0;
  /// Index of the next round, starting at 1.
  int t = 1;

  static OgdState initial(Eigen::Index dim, double gradient_bound,
                          double radius);
};

/// theta <- Proj(theta - D / (G sqrt(t)) g), then ++t.
OgdState ogd_step(OgdState state, const Eigen::VectorXd& g);

/// Second-order exponential weights:
///   pi'_k ~ pi_k exp(-gamma_k l_k - gamma_k^2 l_k^2),
/// computed in log space. Falls back to uniform (with a warning) if every
/// weight underflows.
Eigen::VectorXd boa_update(const Eigen::VectorXd& weights,
                           const Eigen::VectorXd& grid,
                           const Eigen::VectorXd& lin_losses);

/// How each expert's surrogate curvature is chosen.
enum class AggregationMode {
  /// max(gamma_t / 4, gamma_k): the adaptive SurvONS rule.
  kAdaptive,
  /// gamma_k: plain BOA over ONS experts.
  kFixed,
};

struct SurvOnsState {
  std::vector<OnsState> learners;
  Eigen::VectorXd weights;
  Eigen::VectorXd aggregated;
  Eigen::VectorXd grid;
  double radius = 1.0;
  int round = 0;

  /// One learner per grid value with epsilon_k = 1 / (gamma_k D)^2, all at
  /// the origin, uniform weights.
  static SurvOnsState initial(Eigen::Index dim, const Eigen::VectorXd& grid,
                              double radius);
  /// Same, with explicit epsilons.
  static SurvOnsState initial(Eigen::Index dim, const Eigen::VectorXd& grid,
                              const Eigen::VectorXd& epsilons, double radius);
};

struct RoundOutput {
  /// The aggregated prediction played this round (before the update).
  Eigen::VectorXd prediction;
  double loss = 0.0;
  Eigen::VectorXd gradient;
  CurvatureEstimate curvature;
  /// Curvature actually used for expert k's surrogate.
  Eigen::VectorXd surrogate_gammas;
  /// Weights used to form `prediction`.
  Eigen::VectorXd weights;
};

/// One aggregation round: predict, observe the interval loss at the
/// prediction, update every expert on its surrogate gradient, reweight.
/// When the curvature estimate is degenerate and `degenerate_gamma` > 0 it
/// replaces gamma_k as the surrogate curvature of every expert.
RoundOutput survons_round(SurvOnsState& state, const LossContext& ctx,
                          AggregationMode mode = AggregationMode::kAdaptive,
                          double degenerate_gamma = 0.0);

}  // namespace survons

#endif  // SURVONS_OPTIM_HPP
