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

#ifndef SURVONS_CONCAVITY_HPP
#define SURVONS_CONCAVITY_HPP

#include <optional>

#include <Eigen/Core>

namespace survons {

/// Local curvature constants of one interval loss at the current prediction.
struct CurvatureEstimate {
  double mu = 0.0;
  double gamma = 0.0;
  double grad_norm = 0.0;
  /// False when the gradient is below the degeneracy floor; mu and gamma are
  /// then meaningless (NaN).
  bool valid = false;
};

/// Gradients with norm below this are treated as zero: 1e-12 * (1 + D).
double degeneracy_floor(double radius);

/// Rayleigh quotient along the gradient, g^T H g / ||g||^4. Empty when
/// ||g|| <= floor.
std::optional<double> exp_concavity_mu(const Eigen::VectorXd& g,
                                       const Eigen::MatrixXd& h,
                                       double floor = 1e-12);

/// Directional-derivative constant implied by exp-concavity mu:
///   2 [ z - log(1 + mu z) / mu ] / z^2,   z = grad_norm * D.
/// Empty when z == 0.
std::optional<double> ddc_gamma(double mu, double grad_norm, double radius);

/// max(gamma_t / 4, floor); `floor` when the estimate is degenerate.
double clip_gamma(double gamma_t, double gamma_floor);
double clip_gamma(const CurvatureEstimate& estimate, double gamma_floor);

/// Both constants at once, with the degeneracy rule applied.
CurvatureEstimate estimate_curvature(const Eigen::VectorXd& g,
                                     const Eigen::MatrixXd& h, double radius);

/// Ingredients of the quadratic minorant anchored at `anchor`.
struct SurrogateAnchor {
  Eigen::VectorXd anchor;
  double loss_at_anchor = 0.0;
  Eigen::VectorXd grad_at_anchor;
  double gamma = 0.0;
};

/// l(a) + g^T (theta - a) + gamma/2 (g^T (theta - a))^2.
double surrogate_value(const SurrogateAnchor& a, const Eigen::VectorXd& theta);
/// (1 + gamma g^T (theta - a)) g.
Eigen::VectorXd surrogate_gradient(const SurrogateAnchor& a,
                                   const Eigen::VectorXd& theta);

/// DDC constant of the surrogate over a domain of diameter `diameter`:
/// gamma / (1 + gamma * diameter * grad_norm)^2.
double surrogate_ddc_constant(double gamma, double grad_norm, double diameter);

}  // namespace survons

#endif  // SURVONS_CONCAVITY_HPP
