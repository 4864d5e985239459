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

#include "survons/concavity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "survons/error.hpp"

namespace survons {

double degeneracy_floor(double radius) { return 1e-12 * (1.0 + radius); }

std::optional<double> exp_concavity_mu(const Eigen::VectorXd& g,
                                       const Eigen::MatrixXd& h,
                                       double floor) {
  if (g.size() != h.rows() || h.rows() != h.cols()) {
    throw InvalidArgument("exp_concavity_mu: dimension mismatch");
  }
  const double norm = g.norm();
  if (!(norm > floor)) return std::nullopt;
  const double norm2 = norm * norm;
  return g.dot(h * g) / (norm2 * norm2);
}

namespace {

// a - log(1 + a), accurate for small a.
double log1p_gap(double a) {
  if (a < 0.1) {
    // sum_{k>=2} (-1)^k a^k / k
    double term = a * a;
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double contrib = term / k;
      sum += (k % 2 == 0) ? contrib : -contrib;
      if (contrib < 1e-18 * sum) break;
      term *= a;
    }
    return sum;
  }
  return a - std::log1p(a);
}

}  // namespace

std::optional<double> ddc_gamma(double mu, double grad_norm, double radius) {
  if (!(mu > 0.0)) throw InvalidArgument("ddc_gamma: mu must be positive");
  if (grad_norm < 0.0 || !(radius > 0.0)) {
    throw InvalidArgument("ddc_gamma: need grad_norm >= 0 and radius > 0");
  }
  const double z = grad_norm * radius;
  if (!(z > 0.0)) return std::nullopt;
  const double a = mu * z;
  if (a < 1e-8) {
    // mu (1 - 2a/3 + a^2/2) from the series of log1p
    return mu * (1.0 - 2.0 * a / 3.0 + a * a / 2.0);
  }
  // 2 (z - log1p(a)/mu) / z^2 rewritten as (2/z) * (a - log1p(a)) / a
  return (2.0 / z) * (log1p_gap(a) / a);
}

double clip_gamma(double gamma_t, double gamma_floor) {
  if (!(gamma_floor > 0.0)) {
    throw InvalidArgument("clip_gamma: floor must be positive");
  }
  if (!std::isfinite(gamma_t)) return gamma_floor;
  return std::max(gamma_t / 4.0, gamma_floor);
}

double clip_gamma(const CurvatureEstimate& estimate, double gamma_floor) {
  if (!estimate.valid) return clip_gamma(std::numeric_limits<double>::quiet_NaN(),
                                         gamma_floor);
  return clip_gamma(estimate.gamma, gamma_floor);
}

CurvatureEstimate estimate_curvature(const Eigen::VectorXd& g,
                                     const Eigen::MatrixXd& h, double radius) {
  CurvatureEstimate est;
  est.grad_norm = g.norm();
  est.mu = std::numeric_limits<double>::quiet_NaN();
  est.gamma = std::numeric_limits<double>::quiet_NaN();
  const auto mu = exp_concavity_mu(g, h, degeneracy_floor(radius));
  if (!mu || !(*mu > 0.0)) return est;
  const auto gamma = ddc_gamma(*mu, est.grad_norm, radius);
  if (!gamma) return est;
  est.mu = *mu;
  est.gamma = *gamma;
  est.valid = true;
  return est;
}

double surrogate_value(const SurrogateAnchor& a, const Eigen::VectorXd& theta) {
  if (theta.size() != a.anchor.size() ||
      a.grad_at_anchor.size() != a.anchor.size()) {
    throw InvalidArgument("surrogate_value: dimension mismatch");
  }
  const double z = a.grad_at_anchor.dot(theta - a.anchor);
  return a.loss_at_anchor + z + 0.5 * a.gamma * z * z;
}

Eigen::VectorXd surrogate_gradient(const SurrogateAnchor& a,
                                   const Eigen::VectorXd& theta) {
  if (theta.size() != a.anchor.size() ||
      a.grad_at_anchor.size() != a.anchor.size()) {
    throw InvalidArgument("surrogate_gradient: dimension mismatch");
  }
  const double z = a.grad_at_anchor.dot(theta - a.anchor);
  return (1.0 + a.gamma * z) * a.grad_at_anchor;
}

double surrogate_ddc_constant(double gamma, double grad_norm, double diameter) {
  if (!(gamma > 0.0) || grad_norm < 0.0 || diameter < 0.0) {
    throw InvalidArgument(
        "surrogate_ddc_constant: need gamma > 0, grad_norm >= 0, diameter >= 0");
  }
  const double scale = 1.0 + gamma * diameter * grad_norm;
  return gamma / (scale * scale);
}

}  // namespace survons
